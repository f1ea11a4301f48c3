"""Node selection: weighted feeder sampling and VRF-style committee election."""

from __future__ import annotations

import hashlib
import hmac
import random
from dataclasses import dataclass

from .domain import CommitteeState
from .errors import DomainError, InsufficientPoolError

DEFAULT_WEIGHT_FLOOR = 1e-6

_PK_TAG = b"oraclesim-vrf-pk:"


@dataclass(frozen=True)
class VrfOutput:
    """A 256-bit pseudorandom value plus the proof that opens it."""

    value: int
    proof: bytes


def vrf_public_key(secret_key: bytes) -> bytes:
    """Commitment to a secret key, published at registration."""
    if not secret_key:
        raise DomainError("secret key must be non-empty")
    return hashlib.sha256(_PK_TAG + secret_key).digest()


def vrf_evaluate(secret_key: bytes, seed: bytes) -> VrfOutput:
    """Keyed-hash VRF: deterministic pseudorandom value for (key, seed).

    The proof is the key opening of the registered commitment; this gives the
    verify contract of a VRF at simulation grade (an ECVRF is out of scope).
    """
    if not secret_key:
        raise DomainError("secret key must be non-empty")
    if not seed:
        raise DomainError("seed must be non-empty")
    digest = hmac.new(secret_key, seed, hashlib.sha256).digest()
    return VrfOutput(value=int.from_bytes(digest, "big"), proof=secret_key)


def vrf_verify(public_key: bytes, seed: bytes, output: VrfOutput) -> bool:
    """True iff the output was produced under the secret matching public_key."""
    if not public_key or not seed:
        return False
    try:
        if vrf_public_key(output.proof) != public_key:
            return False
        digest = hmac.new(output.proof, seed, hashlib.sha256).digest()
        return int.from_bytes(digest, "big") == output.value
    except (DomainError, TypeError):
        return False


class WeightTable:
    """Selection weights over the currently selectable node population.

    Supports weighted sampling without replacement, multiplicative outcome
    feedback, the provisional-status penalty, and permanent removal on
    blacklisting.  Weights never fall below the positive floor.
    """

    def __init__(self, weights: dict[str, float], weight_floor: float = DEFAULT_WEIGHT_FLOOR):
        if weight_floor <= 0:
            raise DomainError("weight floor must be positive")
        for node_id, w in weights.items():
            if w <= 0:
                raise DomainError(f"weight for {node_id} must be positive, got {w}")
        self._weights: dict[str, float] = dict(weights)
        self.weight_floor = weight_floor

    @classmethod
    def from_reputations(
        cls, reputations: dict[str, float], weight_floor: float = DEFAULT_WEIGHT_FLOOR
    ) -> "WeightTable":
        """Initial weights proportional to reputation, normalized to mean 1."""
        if not reputations:
            raise DomainError("cannot build a weight table from an empty population")
        mean = sum(reputations.values()) / len(reputations)
        return cls(
            {node_id: r / mean for node_id, r in reputations.items()},
            weight_floor=weight_floor,
        )

    def __contains__(self, node_id: str) -> bool:
        return node_id in self._weights

    def __len__(self) -> int:
        return len(self._weights)

    def weight_of(self, node_id: str) -> float:
        return self._weights[node_id]

    @property
    def total_weight(self) -> float:
        return sum(self._weights.values())

    def node_ids(self) -> list[str]:
        return list(self._weights)

    def remove(self, node_id: str) -> None:
        self._weights.pop(node_id, None)

    def scale(self, node_id: str, factor: float) -> None:
        if factor <= 0:
            raise DomainError(f"scale factor must be positive, got {factor}")
        w = self._weights[node_id] * factor
        self._weights[node_id] = max(w, self.weight_floor)

    def snapshot(self) -> dict[str, float]:
        return dict(self._weights)


def select_feeders(table: WeightTable, n: int, rng: random.Random) -> list[str]:
    """Draw n distinct node ids, each draw proportional to remaining weight."""
    if n < 0:
        raise DomainError(f"n must be non-negative, got {n}")
    if n > len(table):
        raise InsufficientPoolError(
            f"requested {n} feeders from a pool of {len(table)}"
        )
    ids = table.node_ids()
    weights = [table.weight_of(i) for i in ids]
    total = sum(weights)
    chosen: list[str] = []
    for _ in range(n):
        r = rng.random() * total
        acc = 0.0
        pick = len(ids) - 1
        for j, w in enumerate(weights):
            acc += w
            if r < acc:
                pick = j
                break
        chosen.append(ids[pick])
        total -= weights[pick]
        # swap-remove keeps the scan dense
        ids[pick], ids[-1] = ids[-1], ids[pick]
        weights[pick], weights[-1] = weights[-1], weights[pick]
        ids.pop()
        weights.pop()
    return chosen


def adjust_weight_on_outcome(
    table: WeightTable, node_id: str, outcome: str, alpha: float
) -> None:
    """Scale a node's weight by (1 + alpha) on a pass, (1 - alpha) on a fail."""
    if outcome not in ("passed", "failed"):
        raise DomainError(f"outcome must be 'passed' or 'failed', got {outcome!r}")
    if not 0.0 <= alpha < 1.0:
        raise DomainError(f"alpha must be in [0, 1), got {alpha}")
    if node_id not in table:
        raise KeyError(f"unknown node {node_id}")
    table.scale(node_id, 1.0 + alpha if outcome == "passed" else 1.0 - alpha)


def select_committee(
    candidates: dict[str, bytes],
    committee_size: int,
    round_seed: bytes,
    epoch: int,
    cyc: int,
) -> CommitteeState:
    """Elect a committee: lowest VRF values win, roles in ascending order.

    Every candidate evaluates its VRF on the round seed; the lowest value is
    questioner, the second lowest judge, the rest validators.  All proofs are
    verified before the committee is seated.
    """
    if committee_size < 3:
        raise DomainError(f"committee size must be >= 3, got {committee_size}")
    if committee_size > len(candidates):
        raise InsufficientPoolError(
            f"requested committee of {committee_size} from {len(candidates)} candidates"
        )
    scored = []
    for node_id in sorted(candidates):
        secret = candidates[node_id]
        output = vrf_evaluate(secret, round_seed)
        if not vrf_verify(vrf_public_key(secret), round_seed, output):
            raise DomainError(f"VRF proof for {node_id} failed verification")
        scored.append((output.value, node_id))
    scored.sort()
    winners = [node_id for _, node_id in scored[:committee_size]]
    return CommitteeState(
        questioner=winners[0],
        judge=winners[1],
        validators=tuple(winners[2:]),
        epoch=epoch,
        cyc=cyc,
    )


def derive_round_seed(master_seed: int, round_index: int) -> bytes:
    """round_seed = SHA-256(master_seed as 8-byte BE || round_index as 8-byte BE)."""
    if master_seed < 0 or round_index < 0:
        raise DomainError("master_seed and round_index must be non-negative")
    payload = master_seed.to_bytes(8, "big") + round_index.to_bytes(8, "big")
    return hashlib.sha256(payload).digest()


def derive_label_seed(master_seed: int, label: str) -> int:
    """Integer sub-seed for a named stream: SHA-256(master || label), first 8 bytes."""
    if master_seed < 0:
        raise DomainError("master_seed must be non-negative")
    payload = master_seed.to_bytes(8, "big") + label.encode("utf-8")
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")


def node_secret_key(master_seed: int, node_id: str) -> bytes:
    """Deterministic per-node VRF secret derived from the master seed."""
    payload = master_seed.to_bytes(8, "big") + b"node-sk:" + node_id.encode("utf-8")
    return hashlib.sha256(payload).digest()
