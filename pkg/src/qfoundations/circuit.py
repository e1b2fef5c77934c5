"""Discrete quantum eraser with a deterministic hidden-path dynamics.

Two particles leave a source on perfectly correlated path labels,

    psi0 = (|1>_L |1>_R + |2>_L |2>_R) / sqrt(2),

and fly into a left and a right arm.  Each arm is configured either as a
which-path arm (terminal detector reading the path label) or as an
interference arm (beam splitter, then a terminal detector reading the
output port).  The beam splitter convention is

    |1> -> cos(theta) |1'> + sin(theta) |2'>,
    |2> -> sin(theta) |1'> - cos(theta) |2'>,

real orthogonal; at theta = pi/4 the output ports collect the sum and
difference combinations (|1> +/- |2>)/sqrt(2).  Detector numbering per arm:
the 1-detector receives the difference port, the 2-detector the sum port,
3 and 4 are the which-path detectors on labels 1 and 2.  Copenhagen
statistics come from evolving the joint state through the layered elements
(`hilbert` does the linear algebra) and reading the terminal basis.

On the same circuit rides a deterministic hidden configuration: each
particle actually sits on one label, dressed with a coordinate x in [0,1)
inside it.  Its global coordinate is the cumulative conditional probability
of the labels above it - conditional on the other particle's current actual
label - plus x times its own label's probability.  When an element
transforms an arm, that global coordinate is held fixed while the label
decomposition of [0,1) changes to the post-element conditional; the
particle lands in whichever output interval contains its coordinate.  This
is the monotone inverse-CDF coupling of the before/after conditionals,
hence measure preserving: an equilibrium ensemble reproduces the Born
weights at every layer, which `enumerate_transport` verifies cell by cell.
Detection reads the actual label and conditions the joint state on it, so
later transport on the other arm depends on what was detected here - and on
whether a beam splitter was present here at all.

Modes: float arithmetic for Monte Carlo work; exact sympy radicals for
analytic claims (at theta = pi/4 and pi/8 multiples every probability lives
in a small quadratic extension of the rationals, and comparisons are exact).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import sympy as sp

from . import hilbert
from .streams import stream

__all__ = [
    "INTERFERENCE",
    "WHICHPATH",
    "PATH_LABELS",
    "CircuitElement",
    "OpticalCircuit",
    "DetectorOutcome",
    "PathConfiguration",
    "TransportResult",
    "path_space",
    "joint_space",
    "initial_state",
    "beam_splitter_matrix",
    "build_eraser",
    "evolved_state",
    "copenhagen_joint_distribution",
    "detector_names",
    "outcome_name",
    "global_coordinate",
    "bohmian_transport",
    "sample_equilibrium_configs",
    "sample_bohmian_runs",
    "BohmianSample",
    "enumerate_transport",
    "TransportEnumeration",
    "record_overlap_distance",
    "trajectory_setting_dependence",
    "SettingDependenceReport",
    "export_path_records_json",
]

INTERFERENCE = "interference"
WHICHPATH = "whichpath"
PATH_LABELS = ("1", "2")
_FLOAT_PROB_FLOOR = 1e-12


# ---------------------------------------------------------------------------
# circuit structure


@dataclass(frozen=True)
class CircuitElement:
    layer: int
    arm: str  # 'L' | 'R'
    kind: str  # 'beam_splitter' | 'whichpath_detector' | 'erasure_detector'
    theta: object = None
    phase: object = 0


@dataclass(frozen=True)
class OpticalCircuit:
    settings: tuple[str, str]  # (left, right)
    elements: tuple[CircuitElement, ...]
    right_acts_first: bool
    exact: bool

    def __post_init__(self):
        layers = [e.layer for e in self.elements]
        if any(b <= a for a, b in zip(layers, layers[1:])):
            raise ValueError(f"element layers must strictly increase, got {layers}")
        for arm in "LR":
            terminals = [e for e in self.elements if e.arm == arm and e.kind.endswith("detector")]
            if len(terminals) != 1:
                raise ValueError(f"arm {arm} needs exactly one terminal detector")
            if terminals[0] is not [e for e in self.elements if e.arm == arm][-1]:
                raise ValueError(f"the detector must be the last element on arm {arm}")
        for e in self.elements:
            if e.kind == "beam_splitter":
                th = float(e.theta)
                if not 0.0 <= th <= np.pi / 2 + 1e-12:
                    raise ValueError(f"beam splitter angle {th} outside [0, pi/2]")

    def arm_elements(self, arm: str) -> tuple[CircuitElement, ...]:
        return tuple(e for e in self.elements if e.arm == arm)


@dataclass(frozen=True)
class DetectorOutcome:
    left: str  # 'L1'..'L4'
    right: str  # 'R1'..'R4'

    def pair(self) -> tuple[str, str]:
        return (self.left, self.right)


def detector_names(setting: str, arm: str) -> tuple[str, str]:
    """Outcome names an arm can produce, in detector-number order."""
    if setting == INTERFERENCE:
        return (f"{arm}1", f"{arm}2")
    if setting == WHICHPATH:
        return (f"{arm}3", f"{arm}4")
    raise ValueError(f"unknown setting {setting!r}")


def _detector_number(kind: str, label_idx: int) -> int:
    # interference: difference port (label index 1) -> 1, sum port (index 0) -> 2
    # which-path:   label 1 -> 3, label 2 -> 4
    if kind == "erasure_detector":
        return 2 - label_idx
    return 3 + label_idx


def outcome_name(setting: str, arm: str, label_idx: int) -> str:
    """Detector name an arm reports when its terminal label has this index."""
    kind = "erasure_detector" if setting == INTERFERENCE else "whichpath_detector"
    return f"{arm}{_detector_number(kind, label_idx)}"


def build_eraser(
    left: str,
    right: str,
    theta_left=None,
    theta_right=None,
    right_acts_first: bool = False,
    exact: bool = False,
) -> OpticalCircuit:
    """Two-arm eraser circuit; interference arms get a beam splitter before
    their terminal detector, which-path arms only the detector.

    Layer times honor `right_acts_first`: the full right arm acts before the
    left one when set, else the other way around.  Each arm owns a fixed pair
    of layer slots (1-2 for the first-acting arm, 3-4 for the second) no
    matter how the other arm is configured, so path records taken under
    different far-side settings stay comparable entry by entry.
    """
    for setting in (left, right):
        if setting not in (INTERFERENCE, WHICHPATH):
            raise ValueError(f"unknown setting {setting!r}")
    quarter = sp.pi / 4 if exact else np.pi / 4
    thetas = {
        "L": theta_left if theta_left is not None else quarter,
        "R": theta_right if theta_right is not None else quarter,
    }
    settings = {"L": left, "R": right}
    order = ("R", "L") if right_acts_first else ("L", "R")
    elements = []
    for slot, arm in enumerate(order):
        base = 1 + 2 * slot
        if settings[arm] == INTERFERENCE:
            elements.append(CircuitElement(base, arm, "beam_splitter", theta=thetas[arm]))
            elements.append(CircuitElement(base + 1, arm, "erasure_detector"))
        else:
            elements.append(CircuitElement(base, arm, "whichpath_detector"))
    return OpticalCircuit((left, right), tuple(elements), right_acts_first, exact)


# ---------------------------------------------------------------------------
# states and Copenhagen statistics


def path_space() -> hilbert.HilbertSpace:
    return hilbert.HilbertSpace(PATH_LABELS)


def joint_space() -> hilbert.HilbertSpace:
    return path_space().tensor(path_space())


def initial_state(exact: bool = False) -> hilbert.StateVector:
    """(|11> + |22>)/sqrt(2) on the joint path space."""
    if exact:
        r = 1 / sp.sqrt(2)
        amps = np.array([r, sp.Integer(0), sp.Integer(0), r], dtype=object)
    else:
        r = 1.0 / np.sqrt(2.0)
        amps = np.array([r, 0.0, 0.0, r], dtype=np.complex128)
    return hilbert.StateVector(joint_space(), amps)


def beam_splitter_matrix(theta, phase=0, exact: bool = False) -> np.ndarray:
    """2x2 action on (|1>, |2>) amplitude columns; see the module docstring."""
    if exact:
        c, s = sp.cos(theta), sp.sin(theta)
        ph = sp.exp(sp.I * phase) if phase != 0 else 1
        return np.array([[c, s * ph], [s, -c * ph]], dtype=object)
    c, s = np.cos(float(theta)), np.sin(float(theta))
    ph = np.exp(1j * float(phase)) if phase else 1.0
    return np.array([[c, s * ph], [s, -c * ph]], dtype=np.complex128)


def _identity2(exact: bool) -> np.ndarray:
    if exact:
        return np.array([[sp.Integer(1), sp.Integer(0)], [sp.Integer(0), sp.Integer(1)]], dtype=object)
    return np.eye(2, dtype=np.complex128)


def _joint_unitary(el: CircuitElement, exact: bool) -> hilbert.UnitaryMap:
    b = beam_splitter_matrix(el.theta, el.phase, exact=exact)
    eye = _identity2(exact)
    m = np.kron(b, eye) if el.arm == "L" else np.kron(eye, b)
    return hilbert.UnitaryMap(m)


def evolved_state(circ: OpticalCircuit) -> hilbert.StateVector:
    """Joint state after every beam-splitter layer (detectors read this)."""
    psi = initial_state(exact=circ.exact)
    for el in circ.elements:
        if el.kind == "beam_splitter":
            psi = hilbert.evolve(psi, _joint_unitary(el, circ.exact))
    return psi


def _prob(z, exact: bool):
    if exact:
        return sp.expand(z * sp.conjugate(z))
    zz = complex(z)
    return zz.real * zz.real + zz.imag * zz.imag


def copenhagen_joint_distribution(circ: OpticalCircuit) -> dict:
    """Probability table over joint detector outcomes, keyed (left, right).

    The joint state is evolved through every beam splitter layer; the
    terminal detectors then read the path basis of the evolved state, which
    is the same thing as applying the rotated projectors to the source state.
    """
    psi = evolved_state(circ)
    kinds = {
        arm: circ.arm_elements(arm)[-1].kind for arm in "LR"
    }
    amps = psi.amplitudes.reshape(2, 2)
    out: dict = {}
    for l, r in itertools.product(range(2), range(2)):
        name_l = f"L{_detector_number(kinds['L'], l)}"
        name_r = f"R{_detector_number(kinds['R'], r)}"
        out[(name_l, name_r)] = _prob(amps[l, r], circ.exact)
    total = sum(out.values())
    if circ.exact:
        assert sp.simplify(total - 1) == 0, "joint distribution must sum to 1 exactly"
    else:
        assert abs(float(total) - 1.0) < 1e-12
    return dict(sorted(out.items()))


# ---------------------------------------------------------------------------
# hidden configurations and the monotone transport


@dataclass(frozen=True)
class PathConfiguration:
    """Actual labels, intra-label coordinates, and the per-arm label records."""

    labels: tuple[str, str]
    coords: tuple
    record_left: tuple = ()
    record_right: tuple = ()

    def __post_init__(self):
        for lab in self.labels:
            if lab not in PATH_LABELS:
                raise ValueError(f"label {lab!r} not in {PATH_LABELS}")
        for x in self.coords:
            if not 0 <= float(x) < 1:
                raise ValueError(f"coordinate {x} outside [0, 1)")


@dataclass(frozen=True)
class TransportResult:
    outcome: DetectorOutcome
    config: PathConfiguration


def _is_zero(v, exact: bool) -> bool:
    if exact:
        return sp.simplify(v) == 0
    return abs(v) <= _FLOAT_PROB_FLOOR


def _lt(a, b, exact: bool) -> bool:
    if not exact:
        return a < b
    d = sp.simplify(a - b)
    if d == 0:
        return False
    return bool(d.evalf(50) < 0)


def _conditional(state: list, arm: int, other_label: int, exact: bool) -> list:
    """This arm's label probabilities given the other arm's actual label."""
    if arm == 0:
        amps = [state[0][other_label], state[1][other_label]]
    else:
        amps = [state[other_label][0], state[other_label][1]]
    ps = [_prob(a, exact) for a in amps]
    tot = ps[0] + ps[1]
    if _is_zero(tot, exact):
        raise RuntimeError("conditional state has zero norm; transport is inconsistent")
    return [p / tot for p in ps]


def global_coordinate(probabilities: Sequence, label_idx: int, x):
    """Cumulative probability of the labels above, plus x inside the label."""
    below = probabilities[0] if label_idx == 1 else 0
    return below + x * probabilities[label_idx]


def _apply_bs(state: list, arm: int, b: np.ndarray) -> list:
    new = [[None, None], [None, None]]
    for i, j in itertools.product(range(2), range(2)):
        if arm == 0:
            new[i][j] = b[i, 0] * state[0][j] + b[i, 1] * state[1][j]
        else:
            new[i][j] = b[j, 0] * state[i][0] + b[j, 1] * state[i][1]
    return new


def bohmian_transport(circ: OpticalCircuit, config: PathConfiguration) -> TransportResult:
    """Deterministically carry one hidden configuration through the circuit.

    Beam splitters move the acting arm's (label, x) by the monotone coupling
    described in the module docstring; detectors read the actual label off
    and condition the joint state on it.  The input configuration is left
    untouched; records restart from layer 0.
    """
    exact = circ.exact
    psi = initial_state(exact=exact).amplitudes.reshape(2, 2)
    state = [[psi[0][0], psi[0][1]], [psi[1][0], psi[1][1]]]
    labels = [PATH_LABELS.index(config.labels[0]), PATH_LABELS.index(config.labels[1])]
    xs = list(config.coords)
    records: list = [[(0, PATH_LABELS[labels[0]])], [(0, PATH_LABELS[labels[1]])]]
    outcomes: dict = {}

    for el in circ.elements:
        arm = 0 if el.arm == "L" else 1
        other = labels[1 - arm]
        if el.kind == "beam_splitter":
            before = _conditional(state, arm, other, exact)
            own = before[labels[arm]]
            if _is_zero(own, exact):
                raise RuntimeError("actual label carries zero conditional probability")
            c = global_coordinate(before, labels[arm], xs[arm])
            b = beam_splitter_matrix(el.theta, el.phase, exact=exact)
            state = _apply_bs(state, arm, b)
            after = _conditional(state, arm, other, exact)
            lo = 0
            chosen = None
            for k in range(2):
                hi = lo + after[k]
                if k == 1 or _lt(c, hi, exact):
                    chosen = k
                    break
                lo = hi
            if _is_zero(after[chosen], exact):
                raise RuntimeError("transport landed in a zero-probability label")
            labels[arm] = chosen
            xs[arm] = (c - lo) / after[chosen]
            records[arm].append((el.layer, PATH_LABELS[chosen]))
        else:
            num = _detector_number(el.kind, labels[arm])
            outcomes[el.arm] = f"{el.arm}{num}"
            # condition the joint state on the detected label
            dead = 1 - labels[arm]
            zero = sp.Integer(0) if exact else 0.0
            for j in range(2):
                if arm == 0:
                    state[dead][j] = zero
                else:
                    state[j][dead] = zero

    out = DetectorOutcome(outcomes["L"], outcomes["R"])
    final = PathConfiguration(
        labels=(PATH_LABELS[labels[0]], PATH_LABELS[labels[1]]),
        coords=(xs[0], xs[1]),
        record_left=tuple(records[0]),
        record_right=tuple(records[1]),
    )
    return TransportResult(out, final)


def sample_equilibrium_configs(n: int, rng: np.random.Generator) -> list[PathConfiguration]:
    """Hidden configurations in quantum equilibrium for the source state:
    labels with Born weights, coordinates uniform in [0,1) independently."""
    psi = initial_state()
    probs = np.abs(psi.amplitudes) ** 2
    cum = np.cumsum(probs)
    cum[-1] = 1.0
    cells = np.searchsorted(cum, rng.random(n), side="right")
    coords = rng.random((n, 2))
    out = []
    for cell, (xl, xr) in zip(cells, coords):
        l, r = divmod(int(cell), 2)
        out.append(PathConfiguration((PATH_LABELS[l], PATH_LABELS[r]), (float(xl), float(xr))))
    return out


# ---------------------------------------------------------------------------
# vectorized Monte Carlo sampling (float mode)


@dataclass(frozen=True)
class BohmianSample:
    """Equilibrium ensemble pushed through the circuit, as flat arrays."""

    circuit: OpticalCircuit
    labels0: np.ndarray  # (n, 2) int
    coords0: np.ndarray  # (n, 2) float
    bs_layers: dict  # arm -> tuple of layer ids with a beam splitter
    bs_labels: dict  # arm -> (n, n_bs) int labels after each beam splitter
    outcomes: np.ndarray  # (n, 2) int detector numbers

    @property
    def n(self) -> int:
        return self.labels0.shape[0]

    def outcome_pairs(self) -> list[tuple[str, str]]:
        return [(f"L{a}", f"R{b}") for a, b in self.outcomes]

    def record_tuples(self, arms: Sequence[str] = ("L", "R")) -> list[tuple]:
        """Per-run hashable records: ((layer, label), ...) per requested arm."""
        out = []
        armmap = {"L": 0, "R": 1}
        for i in range(self.n):
            rec = []
            for arm in arms:
                a = armmap[arm]
                entries = [(0, PATH_LABELS[self.labels0[i, a]])]
                for layer, labs in zip(self.bs_layers[arm], self.bs_labels[arm]):
                    entries.append((int(layer), PATH_LABELS[labs[i]]))
                rec.append(tuple(entries))
            out.append(tuple(rec))
        return out

    def run_dicts(self) -> list[dict]:
        """Export form: one dict per run, matching the path-record JSON schema."""
        left, right = self.circuit.settings
        out = []
        for i in range(self.n):
            recs = {}
            for arm, a in (("L", 0), ("R", 1)):
                entries = [[0, PATH_LABELS[self.labels0[i, a]]]]
                for layer, labs in zip(self.bs_layers[arm], self.bs_labels[arm]):
                    entries.append([int(layer), PATH_LABELS[labs[i]]])
                recs[arm] = entries
            out.append(
                {
                    "hidden": {
                        "label_L": PATH_LABELS[self.labels0[i, 0]],
                        "label_R": PATH_LABELS[self.labels0[i, 1]],
                        "x_L": float(self.coords0[i, 0]),
                        "x_R": float(self.coords0[i, 1]),
                    },
                    "settings": {"left": left, "right": right},
                    "record_L": recs["L"],
                    "record_R": recs["R"],
                    "outcome": {"left": f"L{self.outcomes[i, 0]}", "right": f"R{self.outcomes[i, 1]}"},
                }
            )
        return out


def sample_bohmian_runs(
    circ: OpticalCircuit,
    n: int,
    seed: int,
    stream_index: int = 0,
    hidden: tuple[np.ndarray, np.ndarray] | None = None,
) -> BohmianSample:
    """Push n equilibrium configurations through the circuit, vectorized.

    `hidden` can supply (labels0, coords0) directly, e.g. to reuse the same
    initial configurations across different settings.
    """
    if circ.exact:
        raise ValueError("vectorized sampling runs in float mode")
    if hidden is None:
        rng = stream(seed, stream_index)
        psi = initial_state().amplitudes
        probs = np.abs(psi) ** 2
        cum = np.cumsum(probs)
        cum[-1] = 1.0
        cells = np.searchsorted(cum, rng.random(n), side="right")
        labels0 = np.stack(np.divmod(cells, 2), axis=1).astype(np.intp)
        coords0 = rng.random((n, 2))
    else:
        labels0, coords0 = hidden
        labels0 = np.asarray(labels0, dtype=np.intp).copy()
        coords0 = np.asarray(coords0, dtype=np.float64).copy()
        n = labels0.shape[0]

    psi0 = initial_state().amplitudes.reshape(2, 2)
    state = np.broadcast_to(psi0, (n, 2, 2)).copy()
    labels = labels0.copy()
    xs = coords0.copy()
    rows = np.arange(n)
    bs_layers: dict = {"L": [], "R": []}
    bs_labels: dict = {"L": [], "R": []}
    outcomes = np.zeros((n, 2), dtype=np.intp)

    for el in circ.elements:
        a = 0 if el.arm == "L" else 1
        other = labels[:, 1 - a]
        if a == 0:
            amps = state[rows[:, None], np.arange(2)[None, :], other[:, None]]
        else:
            amps = state[rows[:, None], other[:, None], np.arange(2)[None, :]]
        pb = np.abs(amps) ** 2
        tot = pb.sum(axis=1)
        assert np.all(tot > 0), "conditional state has zero norm"
        pb = pb / tot[:, None]

        if el.kind == "beam_splitter":
            own = pb[rows, labels[:, a]]
            assert np.all(own > _FLOAT_PROB_FLOOR), "actual label at zero probability"
            c = np.where(labels[:, a] == 1, pb[:, 0], 0.0) + xs[:, a] * own
            b = beam_splitter_matrix(el.theta, el.phase)
            if a == 0:
                state = np.einsum("ij,njk->nik", b, state)
            else:
                state = np.einsum("ij,nkj->nki", b, state)
            if a == 0:
                amps2 = state[rows[:, None], np.arange(2)[None, :], other[:, None]]
            else:
                amps2 = state[rows[:, None], other[:, None], np.arange(2)[None, :]]
            pa = np.abs(amps2) ** 2
            pa = pa / pa.sum(axis=1)[:, None]
            new_lab = (c >= pa[:, 0]).astype(np.intp)
            chosen = pa[rows, new_lab]
            assert np.all(chosen > _FLOAT_PROB_FLOOR), "transport hit a zero-probability label"
            lo = np.where(new_lab == 1, pa[:, 0], 0.0)
            xs[:, a] = (c - lo) / chosen
            labels[:, a] = new_lab
            bs_layers[el.arm].append(el.layer)
            bs_labels[el.arm].append(new_lab.copy())
        else:
            num = np.where(
                labels[:, a] == 0,
                2 if el.kind == "erasure_detector" else 3,
                1 if el.kind == "erasure_detector" else 4,
            )
            outcomes[:, a] = num
            keep = labels[:, a]
            mask = np.arange(2)[None, :] == keep[:, None]
            if a == 0:
                state = state * mask[:, :, None]
            else:
                state = state * mask[:, None, :]

    return BohmianSample(
        circuit=circ,
        labels0=labels0,
        coords0=coords0,
        bs_layers={k: tuple(v) for k, v in bs_layers.items()},
        bs_labels={k: tuple(v) for k, v in bs_labels.items()},
        outcomes=outcomes,
    )


# ---------------------------------------------------------------------------
# exact enumeration of the transport


@dataclass
class _Cell:
    labels0: tuple[int, int]
    init: tuple  # ((a,b), (c,d)) initial coordinate rectangles
    cur: tuple  # ((lo,hi), (lo,hi)) current intra-label coordinate intervals
    labels: tuple[int, int]
    state: list
    recs: tuple  # (rec_left, rec_right)
    outcome: dict


@dataclass(frozen=True)
class TransportEnumeration:
    """Exact pushforward of the equilibrium measure through the circuit."""

    circuit: OpticalCircuit
    cells: tuple
    layer_distributions: tuple  # ((layer, {(l_idx, r_idx): weight}), ...) transport side
    reference_distributions: tuple  # same layers, Born weights of the evolved state
    outcome_distribution: dict  # (left name, right name) -> weight
    record_distribution: dict  # ((rec_L, rec_R)) -> weight

    def left_marginal(self) -> dict:
        out: dict = {}
        for (l, _), w in self.outcome_distribution.items():
            out[l] = out.get(l, 0) + w
        return dict(sorted(out.items()))

    def initial_label_distribution(self) -> dict:
        psi0 = initial_state(exact=self.circuit.exact).amplitudes.reshape(2, 2)
        out: dict = {}
        for cell in self.cells:
            w = (
                _prob(psi0[cell.labels0[0]][cell.labels0[1]], self.circuit.exact)
                * _interval_len(cell.init[0])
                * _interval_len(cell.init[1])
            )
            out[cell.labels0] = out.get(cell.labels0, 0) + w
        return dict(sorted(out.items()))


def _interval_len(iv):
    return iv[1] - iv[0]


def enumerate_transport(circ: OpticalCircuit) -> TransportEnumeration:
    """Split the hidden-variable space into cells with constant label history.

    Cells are (initial joint label, coordinate sub-rectangle) pieces; the
    transport map is affine on each piece, so finitely many cells capture the
    whole dynamics and all measures are computed in closed form (exactly when
    the circuit is exact).
    """
    exact = circ.exact
    one = sp.Integer(1) if exact else 1.0
    zero = sp.Integer(0) if exact else 0.0
    psi0 = initial_state(exact=exact).amplitudes.reshape(2, 2)

    cells: list[_Cell] = []
    for l, r in itertools.product(range(2), range(2)):
        w = _prob(psi0[l][r], exact)
        if _is_zero(w, exact):
            continue
        cells.append(
            _Cell(
                labels0=(l, r),
                init=((zero, one), (zero, one)),
                cur=((zero, one), (zero, one)),
                labels=(l, r),
                state=[[psi0[0][0], psi0[0][1]], [psi0[1][0], psi0[1][1]]],
                recs=(((0, PATH_LABELS[l]),), ((0, PATH_LABELS[r]),)),
                outcome={},
            )
        )

    label_weights = {
        (l, r): _prob(psi0[l][r], exact) for l, r in itertools.product(range(2), range(2))
    }

    def cell_measure(cell: _Cell):
        return (
            label_weights[cell.labels0]
            * _interval_len(cell.init[0])
            * _interval_len(cell.init[1])
        )

    def label_distribution():
        out: dict = {}
        for cell in cells:
            out[cell.labels] = out.get(cell.labels, zero) + cell_measure(cell)
        return {k: v for k, v in sorted(out.items())}

    psi_ref = initial_state(exact=exact)

    def reference_distribution():
        amps = psi_ref.amplitudes.reshape(2, 2)
        return {
            (l, r): _prob(amps[l, r], exact) for l, r in itertools.product(range(2), range(2))
        }

    layer_dists = [(0, label_distribution())]
    ref_dists = [(0, reference_distribution())]

    for el in circ.elements:
        arm = 0 if el.arm == "L" else 1
        if el.kind == "beam_splitter":
            psi_ref = hilbert.evolve(psi_ref, _joint_unitary(el, exact))
            b = beam_splitter_matrix(el.theta, el.phase, exact=exact)
            new_cells = []
            for cell in cells:
                other = cell.labels[1 - arm]
                before = _conditional(cell.state, arm, other, exact)
                own = before[cell.labels[arm]]
                if _is_zero(own, exact):
                    raise RuntimeError("cell label carries zero conditional probability")
                xlo, xhi = cell.cur[arm]
                base = before[0] if cell.labels[arm] == 1 else zero
                clo = base + xlo * own
                chi = base + xhi * own
                new_state = _apply_bs(cell.state, arm, b)
                after = _conditional(new_state, arm, other, exact)
                bounds = [zero, after[0], one]
                for k in range(2):
                    plo = clo if _lt(bounds[k], clo, exact) else bounds[k]
                    phi = chi if _lt(chi, bounds[k + 1], exact) else bounds[k + 1]
                    if not _lt(plo, phi, exact):
                        continue
                    frac_lo = (plo - clo) / (chi - clo)
                    frac_hi = (phi - clo) / (chi - clo)
                    ia, ib = cell.init[arm]
                    init_arm = (ia + frac_lo * (ib - ia), ia + frac_hi * (ib - ia))
                    cur_arm = ((plo - bounds[k]) / after[k], (phi - bounds[k]) / after[k])
                    init = list(cell.init)
                    cur = list(cell.cur)
                    init[arm] = init_arm
                    cur[arm] = cur_arm
                    labels = list(cell.labels)
                    labels[arm] = k
                    recs = list(cell.recs)
                    recs[arm] = recs[arm] + ((el.layer, PATH_LABELS[k]),)
                    new_cells.append(
                        _Cell(
                            labels0=cell.labels0,
                            init=tuple(init),
                            cur=tuple(cur),
                            labels=tuple(labels),
                            state=new_state,
                            recs=tuple(recs),
                            outcome=dict(cell.outcome),
                        )
                    )
            cells = new_cells
        else:
            for cell in cells:
                lab = cell.labels[arm]
                cell.outcome[el.arm] = f"{el.arm}{_detector_number(el.kind, lab)}"
                dead = 1 - lab
                st = [row[:] for row in cell.state]
                for j in range(2):
                    if arm == 0:
                        st[dead][j] = zero
                    else:
                        st[j][dead] = zero
                cell.state = st
        layer_dists.append((el.layer, label_distribution()))
        ref_dists.append((el.layer, reference_distribution()))

    outcome_dist: dict = {}
    record_dist: dict = {}
    for cell in cells:
        w = cell_measure(cell)
        key = (cell.outcome["L"], cell.outcome["R"])
        outcome_dist[key] = outcome_dist.get(key, zero) + w
        record_dist[cell.recs] = record_dist.get(cell.recs, zero) + w

    return TransportEnumeration(
        circuit=circ,
        cells=tuple(cells),
        layer_distributions=tuple(layer_dists),
        reference_distributions=tuple(ref_dists),
        outcome_distribution=dict(sorted(outcome_dist.items())),
        record_distribution=record_dist,
    )


def _rect_intersection_area(ra, rb, exact: bool):
    area = None
    for (alo, ahi), (blo, bhi) in zip(ra, rb):
        lo = blo if _lt(alo, blo, exact) else alo
        hi = bhi if _lt(bhi, ahi, exact) else ahi
        if not _lt(lo, hi, exact):
            return None
        side = hi - lo
        area = side if area is None else area * side
    return area


def record_overlap_distance(
    enum_a: TransportEnumeration,
    enum_b: TransportEnumeration,
    arms: Sequence[str] = ("L", "R"),
):
    """Total variation distance between the two (hidden value, record) laws.

    Both enumerations push the same equilibrium prior through deterministic
    maps, so the distance equals the prior measure of initial configurations
    whose records differ; computed by intersecting the two cell partitions.
    """
    exact = enum_a.circuit.exact
    if exact != enum_b.circuit.exact:
        raise ValueError("cannot mix exact and float enumerations")
    armsel = tuple("LR".index(a) for a in arms)
    zero = sp.Integer(0) if exact else 0.0
    psi0 = initial_state(exact=exact).amplitudes.reshape(2, 2)
    agree = zero
    for ca in enum_a.cells:
        for cb in enum_b.cells:
            if ca.labels0 != cb.labels0:
                continue
            if tuple(ca.recs[i] for i in armsel) != tuple(cb.recs[i] for i in armsel):
                continue
            inter = _rect_intersection_area(ca.init, cb.init, exact)
            if inter is None:
                continue
            agree = agree + _prob(psi0[ca.labels0[0]][ca.labels0[1]], exact) * inter
    dist = 1 - agree
    return sp.simplify(dist) if exact else float(dist)


# ---------------------------------------------------------------------------
# setting dependence of individual hidden values


@dataclass(frozen=True)
class SettingDependenceReport:
    changed_fraction: float
    n: int
    examples: tuple  # (config, record under interference, record under whichpath)


def trajectory_setting_dependence(
    hidden_configs: Sequence[PathConfiguration],
    right_acts_first: bool = True,
    theta=None,
    max_examples: int = 3,
) -> SettingDependenceReport:
    """Rerun fixed hidden values with the right arm toggled between settings.

    The left arm stays an interference arm; for each hidden value the left
    label records under right = interference and right = whichpath are
    compared.  A nonzero changed fraction means the left-side hidden path
    depends on the far setting even though the left-side outcome statistics
    do not.
    """
    circ_int = build_eraser(
        INTERFERENCE, INTERFERENCE, theta_left=theta, theta_right=theta,
        right_acts_first=right_acts_first,
    )
    circ_wp = build_eraser(
        INTERFERENCE, WHICHPATH, theta_left=theta,
        right_acts_first=right_acts_first,
    )
    changed = 0
    examples = []
    for cfg in hidden_configs:
        ra = bohmian_transport(circ_int, cfg)
        rb = bohmian_transport(circ_wp, cfg)
        if ra.config.record_left != rb.config.record_left:
            changed += 1
            if len(examples) < max_examples:
                examples.append((cfg, ra.config.record_left, rb.config.record_left))
    n = len(hidden_configs)
    return SettingDependenceReport(changed / n if n else 0.0, n, tuple(examples))


def export_path_records_json(path, runs: Sequence[dict]) -> None:
    import json

    with open(path, "w", newline="\n") as fh:
        json.dump(list(runs), fh, indent=2, sort_keys=True)
        fh.write("\n")
