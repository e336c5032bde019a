"""Statevector simulation with dense and sparse backends.

Gates are simulator primitives: Hadamard, X, Ry and a pattern phase flip,
each carrying an arbitrary multi-control pattern of (qubit, required bit)
pairs. Controlled gates act natively on the state, never decomposed into
smaller gates. Qubit 0 is the least significant bit of the basis index;
printed basis strings put the most significant qubit first.

Determinism contract: reductions (norm, marginals, sampling) accumulate in a
fixed sequential order over ascending basis indices, and sampling uses an
inverse-CDF walk driven by ``numpy.random.default_rng(seed)``, so identical
(amplitudes, shots, seed) give identical counts on either backend and any
thread count. The kernels themselves are sequential; the ``QMDP_THREADS``
environment variable documented by the CLI caps parallelism that the
implementation never exceeds anyway.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

H = "h"
X = "x"
RY = "ry"
FLIP = "flip"
_KINDS = (H, X, RY, FLIP)

DENSE_QUBIT_LIMIT = 26  # 2**26 amplitudes, 1 GiB at 16 bytes each
PRUNE_TOL = 1e-14  # sparse entries below this magnitude are dropped
_INV_SQRT2 = 1.0 / math.sqrt(2.0)

Controls = tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class Gate:
    """One primitive gate application.

    ``controls`` lists (qubit, required bit) pairs; the gate acts only on
    basis states matching every pair. ``flip`` negates the amplitude of
    matching basis states and takes no target (an empty pattern is a global
    phase of -1); the other kinds need a target qubit.
    """

    kind: str
    target: int | None = None
    theta: float = 0.0
    controls: Controls = ()

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind == FLIP:
            if self.target is not None:
                raise ValueError("flip takes no target, only a control pattern")
        else:
            if self.target is None or self.target < 0:
                raise ValueError(f"{self.kind} needs a non-negative target qubit")
        object.__setattr__(self, "controls", tuple((int(q), int(b)) for q, b in self.controls))
        seen = set()
        for q, b in self.controls:
            if q < 0:
                raise ValueError(f"control qubit {q} is negative")
            if b not in (0, 1):
                raise ValueError(f"control bit for qubit {q} must be 0 or 1, got {b}")
            if q in seen or q == self.target:
                raise ValueError(f"control qubit {q} repeated or equal to target")
            seen.add(q)

    def inverse(self) -> "Gate":
        """H, X and flip are self-inverse; Ry inverts by negating the angle."""
        if self.kind == RY:
            return Gate(RY, self.target, -self.theta, self.controls)
        return self

    def qubits(self) -> list[int]:
        out = [q for q, _ in self.controls]
        if self.target is not None:
            out.append(self.target)
        return out


@dataclass
class Circuit:
    """An ordered gate list over a fixed register width."""

    num_qubits: int
    gates: list[Gate] = field(default_factory=list)

    def add(self, gate: Gate) -> "Circuit":
        for q in gate.qubits():
            if q >= self.num_qubits:
                raise ValueError(f"gate touches qubit {q} outside register of {self.num_qubits}")
        self.gates.append(gate)
        return self

    def h(self, target: int, controls: Controls = ()) -> "Circuit":
        return self.add(Gate(H, target, controls=controls))

    def x(self, target: int, controls: Controls = ()) -> "Circuit":
        return self.add(Gate(X, target, controls=controls))

    def ry(self, theta: float, target: int, controls: Controls = ()) -> "Circuit":
        return self.add(Gate(RY, target, float(theta), controls))

    def flip(self, pattern: Controls) -> "Circuit":
        return self.add(Gate(FLIP, None, controls=pattern))

    def extend(self, other: "Circuit") -> "Circuit":
        if other.num_qubits != self.num_qubits:
            raise ValueError("cannot extend with a circuit of different width")
        for gate in other.gates:
            self.gates.append(gate)
        return self

    def inverse(self) -> "Circuit":
        """Gates reversed, each inverted; C followed by C.inverse() is the identity."""
        return Circuit(self.num_qubits, [g.inverse() for g in reversed(self.gates)])

    def __len__(self) -> int:
        return len(self.gates)


def format_circuit(circuit: Circuit) -> str:
    """Plain-text dump, one gate per line:
    ``<kind>(<theta?>) target=<q> controls=[<q>:<bit>,...]``."""
    lines = []
    for g in circuit.gates:
        kind = f"ry({g.theta!r})" if g.kind == RY else g.kind
        target = "-" if g.target is None else str(g.target)
        controls = ",".join(f"{q}:{b}" for q, b in g.controls)
        lines.append(f"{kind} target={target} controls=[{controls}]")
    return "\n".join(lines) + ("\n" if lines else "")


def _pattern_mask(controls: Controls) -> tuple[int, int]:
    mask = want = 0
    for q, b in controls:
        mask |= 1 << q
        if b:
            want |= 1 << q
    return mask, want


def _gate_matrix(gate: Gate) -> tuple[float, float, float, float]:
    # Row-major 2x2 real matrix (m00, m01, m10, m11).
    if gate.kind == H:
        return _INV_SQRT2, _INV_SQRT2, _INV_SQRT2, -_INV_SQRT2
    if gate.kind == X:
        return 0.0, 1.0, 1.0, 0.0
    c = math.cos(gate.theta / 2.0)
    s = math.sin(gate.theta / 2.0)
    return c, -s, s, c


class _StateBase:
    """Behavior shared by both backends; subclasses store amplitudes."""

    backend = ""
    num_qubits: int

    # subclasses provide: apply(gate), copy(), amplitude(index),
    # _nonzero() -> (ascending index array, complex amplitude array)

    def apply_circuit(self, circuit: Circuit) -> "_StateBase":
        if circuit.num_qubits != self.num_qubits:
            raise ValueError(
                f"circuit width {circuit.num_qubits} does not match state width {self.num_qubits}"
            )
        for gate in circuit.gates:
            self.apply(gate)
        return self

    def bitstring(self, index: int) -> str:
        return format(index, f"0{self.num_qubits}b")

    def norm(self) -> float:
        _, amps = self._nonzero()
        return float(np.sum(np.abs(amps) ** 2))

    def nonzero_items(self) -> list[tuple[int, complex]]:
        """(basis index, amplitude) pairs, ascending index."""
        idx, amps = self._nonzero()
        return [(int(i), complex(a)) for i, a in zip(idx, amps)]

    def probabilities(self) -> dict[str, float]:
        """Nonzero basis probabilities keyed by printed bit string."""
        idx, amps = self._nonzero()
        return {self.bitstring(int(i)): float(abs(a) ** 2) for i, a in zip(idx, amps)}

    def pattern_items(self, pattern: Controls) -> list[tuple[int, float]]:
        """(index, probability) over nonzero basis states matching a pattern."""
        mask, want = _pattern_mask(pattern)
        idx, amps = self._nonzero()
        out = []
        for i, a in zip(idx, amps):
            if int(i) & mask == want:
                out.append((int(i), float(abs(a) ** 2)))
        return out

    def pattern_probability(self, pattern: Controls) -> float:
        return float(sum(p for _, p in self.pattern_items(pattern)))

    def marginal(self, qubits: list[int]) -> dict[int, float]:
        """Distribution over the values of an ordered qubit subset.

        ``qubits[j]`` contributes bit j of the key, so a register listed
        least-significant-first maps to its plain integer value. Only
        patterns with nonzero probability appear.
        """
        if len(set(qubits)) != len(qubits):
            raise ValueError("marginal qubits must be distinct")
        for q in qubits:
            if not 0 <= q < self.num_qubits:
                raise ValueError(f"qubit {q} outside register of {self.num_qubits}")
        idx, amps = self._nonzero()
        out: dict[int, float] = {}
        for i, a in zip(idx, amps):  # ascending index: fixed reduction order
            i = int(i)
            key = 0
            for j, q in enumerate(qubits):
                key |= ((i >> q) & 1) << j
            out[key] = out.get(key, 0.0) + float(abs(a) ** 2)
        return dict(sorted(out.items()))

    def sample(self, shots: int, seed: int) -> dict[str, int]:
        """Seeded counts by inverse CDF over ascending basis indices."""
        if shots < 0:
            raise ValueError(f"shots must be >= 0, got {shots}")
        if shots == 0:
            return {}
        idx, amps = self._nonzero()
        if len(idx) == 0:
            raise ValueError("cannot sample from an all-zero state")
        probs = np.abs(np.asarray(amps)) ** 2
        cum = np.cumsum(probs)
        rng = np.random.default_rng(seed)
        u = rng.random(shots) * cum[-1]
        picks = np.minimum(np.searchsorted(cum, u, side="right"), len(cum) - 1)
        counts: dict[str, int] = {}
        for p in np.sort(picks):
            key = self.bitstring(int(idx[int(p)]))
            counts[key] = counts.get(key, 0) + 1
        return counts

    def phase_flip(self, pattern: Controls) -> "_StateBase":
        """Negate amplitudes of basis states matching the pattern."""
        return self.apply(Gate(FLIP, None, controls=pattern))

    def dump(self) -> str:
        """One line per nonzero amplitude: ``<bitstring> <re> <im>``."""
        lines = [
            f"{self.bitstring(i)} {a.real!r} {a.imag!r}"
            for i, a in self.nonzero_items()
        ]
        return "\n".join(lines) + ("\n" if lines else "")


class DenseState(_StateBase):
    """Contiguous array of 2**n complex amplitudes."""

    backend = "dense"

    def __init__(self, num_qubits: int, amps: np.ndarray | None = None):
        if num_qubits < 1:
            raise ValueError(f"num_qubits must be >= 1, got {num_qubits}")
        if num_qubits > DENSE_QUBIT_LIMIT:
            raise ValueError(
                f"dense backend capacity exceeded: {num_qubits} qubits needs "
                f"{(2**num_qubits * 16) >> 20} MiB of amplitudes, limit is "
                f"{DENSE_QUBIT_LIMIT} qubits (1 GiB); use the sparse backend"
            )
        self.num_qubits = num_qubits
        if amps is None:
            amps = np.zeros(1 << num_qubits, dtype=np.complex128)
            amps[0] = 1.0
        self._amps = amps

    def copy(self) -> "DenseState":
        return DenseState(self.num_qubits, self._amps.copy())

    def amplitude(self, index: int) -> complex:
        return complex(self._amps[index])

    def _axis(self, qubit: int) -> int:
        return self.num_qubits - 1 - qubit

    def apply(self, gate: Gate) -> "DenseState":
        n = self.num_qubits
        for q in gate.qubits():
            if q >= n:
                raise ValueError(f"gate touches qubit {q} outside register of {n}")
        grid = self._amps.reshape((2,) * n)
        index: list = [slice(None)] * n
        for q, b in gate.controls:
            index[self._axis(q)] = b
        if gate.kind == FLIP:
            grid[tuple(index)] *= -1.0
            return self
        axis = self._axis(gate.target)
        index[axis] = 0
        sel0 = tuple(index)
        index[axis] = 1
        sel1 = tuple(index)
        a0 = grid[sel0]
        a1 = grid[sel1]
        if gate.kind == X:
            tmp = a0.copy()
            grid[sel0] = a1
            grid[sel1] = tmp
            return self
        m00, m01, m10, m11 = _gate_matrix(gate)
        # Both outputs are formed before either slice is overwritten, and the
        # multiply-then-add shape matches the sparse kernel bit for bit.
        new0 = m00 * a0 + m01 * a1
        new1 = m10 * a0 + m11 * a1
        grid[sel0] = new0
        grid[sel1] = new1
        return self

    def _nonzero(self):
        idx = np.flatnonzero(self._amps)
        return idx, self._amps[idx]


class SparseState(_StateBase):
    """Hash map from basis index to amplitude; zero entries are absent.

    After every amplitude-mixing gate, entries with magnitude below
    ``PRUNE_TOL`` are dropped so cancelled branches do not accumulate.
    """

    backend = "sparse"

    def __init__(self, num_qubits: int, amps: dict[int, complex] | None = None):
        if num_qubits < 1:
            raise ValueError(f"num_qubits must be >= 1, got {num_qubits}")
        self.num_qubits = num_qubits
        self._amps = {0: 1.0 + 0.0j} if amps is None else amps

    def copy(self) -> "SparseState":
        return SparseState(self.num_qubits, dict(self._amps))

    def amplitude(self, index: int) -> complex:
        return complex(self._amps.get(index, 0.0))

    def apply(self, gate: Gate) -> "SparseState":
        n = self.num_qubits
        for q in gate.qubits():
            if q >= n:
                raise ValueError(f"gate touches qubit {q} outside register of {n}")
        mask, want = _pattern_mask(gate.controls)
        amps = self._amps
        if gate.kind == FLIP:
            for i, a in amps.items():
                if i & mask == want:
                    amps[i] = -a
            return self
        tbit = 1 << gate.target
        if gate.kind == X:
            out: dict[int, complex] = {}
            for i, a in amps.items():
                out[i ^ tbit if i & mask == want else i] = a
            self._amps = out
            return self
        m00, m01, m10, m11 = _gate_matrix(gate)
        out = {}
        for i, a in amps.items():
            if i & mask != want:
                out[i] = out.get(i, 0.0) + a
                continue
            lo = i & ~tbit
            hi = i | tbit
            if i & tbit:
                out[lo] = out.get(lo, 0.0) + m01 * a
                out[hi] = out.get(hi, 0.0) + m11 * a
            else:
                out[lo] = out.get(lo, 0.0) + m00 * a
                out[hi] = out.get(hi, 0.0) + m10 * a
        self._amps = {i: a for i, a in out.items() if abs(a) >= PRUNE_TOL}
        return self

    def _nonzero(self):
        idx = sorted(self._amps)
        return np.array(idx, dtype=np.int64), np.array([self._amps[i] for i in idx], dtype=np.complex128)


def prepare_zero(num_qubits: int, backend: str = "sparse") -> _StateBase:
    """Fresh |0...0> state on the chosen backend.

    The dense backend allocates all 2**n amplitudes and refuses more than
    ``DENSE_QUBIT_LIMIT`` qubits; the sparse backend is bounded by occupied
    entries, not by width.
    """
    if backend == "dense":
        return DenseState(num_qubits)
    if backend == "sparse":
        return SparseState(num_qubits)
    raise ValueError(f"unknown backend {backend!r}, expected 'dense' or 'sparse'")
