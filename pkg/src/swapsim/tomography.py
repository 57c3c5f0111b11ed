"""State and process tomography plus the fidelity/purity/visibility metrics.

Measurement settings are named by their Bloch states: H,V,D,A,R,L for the
polarization qubit and 0,1,+,-,i,-i for the spatial-momentum qubit, paired
into the z, x, y axes in that order.  Reconstruction is linear inversion of
Stokes parameters followed by the eigenvalue-redistribution projection onto
physical states, matching the count levels of the experiments (iterative
maximum likelihood is deliberately out of scope).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .qcore import (
    DensityMatrix,
    PauliBasis,
    ProcessMatrix,
    QuantumChannel,
    dagger,
    ket2,
    project_to_physical,
)

__all__ = [
    "POLARIZATION_LABELS",
    "MOMENTUM_LABELS",
    "MeasurementSetting",
    "CountRecord",
    "counts_to_csv",
    "counts_from_csv",
    "TruthTable",
    "ideal_truth_table",
    "truth_table_fidelity",
    "state_tomo_1q",
    "state_tomo_2q",
    "process_tomo",
    "chi_from_unitary",
    "process_fidelity",
    "process_purity",
    "FringeFit",
    "fringe_fit",
]

POLARIZATION_LABELS = ("H", "V", "D", "A", "R", "L")
MOMENTUM_LABELS = ("0", "1", "+", "-", "i", "-i")

# axis -> (+1 label, -1 label), per subsystem flavor
_AXIS_PAIRS = {
    "polarization": {"z": ("H", "V"), "x": ("D", "A"), "y": ("R", "L")},
    "momentum": {"z": ("0", "1"), "x": ("+", "-"), "y": ("i", "-i")},
}

_PAULI_1Q = PauliBasis(1)
_PAULI_2Q = PauliBasis(2)


@dataclass(frozen=True)
class MeasurementSetting:
    """A rank-1 projective setting on one qubit."""

    subsystem: str  # "polarization" | "momentum"
    label: str

    def __post_init__(self):
        allowed = POLARIZATION_LABELS if self.subsystem == "polarization" else MOMENTUM_LABELS
        if self.subsystem not in ("polarization", "momentum"):
            raise ValueError(f"unknown subsystem {self.subsystem!r}")
        if self.label not in allowed:
            raise ValueError(f"label {self.label!r} not valid for {self.subsystem}")

    def state_vector(self) -> np.ndarray:
        return ket2(self.label)

    def projector(self) -> np.ndarray:
        v = self.state_vector()
        return np.outer(v, v.conj())

    def channel(self) -> QuantumChannel:
        return QuantumChannel(2, 2, (self.projector(),))


@dataclass(frozen=True)
class CountRecord:
    """One integrated coincidence count for a measurement setting."""

    setting_label_q1: str
    setting_label_q2: str  # empty string for single-qubit data
    counts: int
    integration_time_s: float
    seed: int

    def __post_init__(self):
        if self.counts < 0:
            raise ValueError("counts must be nonnegative")
        if self.integration_time_s <= 0:
            raise ValueError("integration time must be positive")


CSV_HEADER = ["setting_label_q1", "setting_label_q2", "counts",
              "integration_time_s", "seed"]


def counts_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([r.setting_label_q1, r.setting_label_q2, r.counts,
                    repr(r.integration_time_s), r.seed])
    return buf.getvalue()


def counts_from_csv(text: str) -> list:
    rd = csv.reader(io.StringIO(text))
    header = next(rd)
    if header != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header}")
    out = []
    for row in rd:
        if not row:
            continue
        out.append(CountRecord(row[0], row[1], int(row[2]), float(row[3]), int(row[4])))
    return out


# ---------------------------------------------------------------------------
# truth tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TruthTable:
    """4x4 table of output-basis probabilities, columns indexed by input."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        if m.shape != (4, 4):
            raise ValueError("truth table must be 4x4")
        if m.min() < -1e-12 or m.max() > 1.0 + 1e-9:
            raise ValueError("truth-table entries must lie in [0, 1]")

    def column_normalized(self) -> "TruthTable":
        sums = self.matrix.sum(axis=0)
        if np.any(sums <= 0):
            raise ValueError("cannot normalize a column with zero total")
        return TruthTable(self.matrix / sums)


def ideal_truth_table(frame: str = "raw") -> TruthTable:
    """Ideal SWAP-chip table: raw frame {00->11, 01->01, 10->10, 11->00},
    relabeled frame {00->00, 01->10, 10->01, 11->11}."""
    m = np.zeros((4, 4))
    if frame == "raw":
        for j, i in enumerate((3, 1, 2, 0)):
            m[i, j] = 1.0
    elif frame == "relabeled":
        for j, i in enumerate((0, 2, 1, 3)):
            m[i, j] = 1.0
    else:
        raise ValueError(f"unknown frame {frame!r}")
    return TruthTable(m)


def truth_table_fidelity(m_exp: TruthTable, m_ideal: TruthTable) -> float:
    """F = (1/4) sum_ij ideal_ij exp_ij with column-normalized measurements.

    For the permutation-style ideal tables used here the trace
    normalization Tr(M_ideal M_ideal^T) equals 4, so this matches the
    quoted fidelity convention exactly.
    """
    exp = m_exp.matrix
    sums = exp.sum(axis=0)
    if np.max(np.abs(sums - 1.0)) > 1e-9:
        raise ValueError("measured table columns must be normalized to 1")
    ideal = m_ideal.matrix
    if not np.all(np.isin(ideal, (0.0, 1.0))) or np.any(ideal.sum(axis=0) != 1.0):
        raise ValueError("ideal table must be a 0/1 table with one entry per column")
    return float(np.sum(ideal * exp) / 4.0)


# ---------------------------------------------------------------------------
# state tomography
# ---------------------------------------------------------------------------

def _flavor_of(labels) -> str:
    if set(labels) <= set(POLARIZATION_LABELS):
        return "polarization"
    if set(labels) <= set(MOMENTUM_LABELS):
        return "momentum"
    raise ValueError(f"mixed or unknown setting labels: {sorted(labels)}")


def state_tomo_1q(counts) -> DensityMatrix:
    """Single-qubit linear-inversion tomography from six-setting counts.

    `counts` maps the six setting labels (either polarization or momentum
    flavor) to nonnegative numbers.  Stokes components come from antipodal
    count ratios; the linear estimate is projected to the physical set.
    """
    flavor = _flavor_of(counts.keys())
    pairs = _AXIS_PAIRS[flavor]
    stokes = {}
    for axis, (plus, minus) in pairs.items():
        if plus not in counts or minus not in counts:
            raise ValueError(f"missing counts for axis {axis}")
        npl, nmi = float(counts[plus]), float(counts[minus])
        if npl + nmi <= 0:
            raise ValueError(f"zero total counts on axis {axis}")
        stokes[axis] = (npl - nmi) / (npl + nmi)
    _, sx, sy, sz = _PAULI_1Q.operators
    lin = 0.5 * (np.eye(2, dtype=complex)
                 + stokes["x"] * sx + stokes["y"] * sy + stokes["z"] * sz)
    return project_to_physical(lin)


def _axis_expectations_2q(counts, flavors) -> dict:
    pairs1 = _AXIS_PAIRS[flavors[0]]
    pairs2 = _AXIS_PAIRS[flavors[1]]
    axes = ("x", "y", "z")

    def combos(a, b):
        return [(pairs1[a][i1], pairs2[b][i2], s1, s2)
                for i1, s1 in ((0, 1), (1, -1))
                for i2, s2 in ((0, 1), (1, -1))]

    joint = {}
    sums1 = {a: [] for a in axes}
    sums2 = {b: [] for b in axes}
    for a in axes:
        for b in axes:
            cs = combos(a, b)
            total = sum(float(counts[(l1, l2)]) for l1, l2, _, _ in cs)
            if total <= 0:
                raise ValueError(f"zero total counts for axis pair ({a},{b})")
            joint[(a, b)] = sum(s1 * s2 * float(counts[(l1, l2)]) for l1, l2, s1, s2 in cs) / total
            sums1[a].append(sum(s1 * float(counts[(l1, l2)]) for l1, l2, s1, _ in cs) / total)
            sums2[b].append(sum(s2 * float(counts[(l1, l2)]) for l1, l2, _, s2 in cs) / total)
    singles1 = {a: float(np.mean(v)) for a, v in sums1.items()}
    singles2 = {b: float(np.mean(v)) for b, v in sums2.items()}
    return {"joint": joint, "q1": singles1, "q2": singles2}


def state_tomo_2q(counts) -> DensityMatrix:
    """Two-qubit linear-inversion tomography from the 36-setting local grid.

    `counts` maps (label_q1, label_q2) pairs to numbers, covering all six
    settings per qubit.  Pauli expectation values are estimated from count
    ratios within each axis pair (single-qubit terms are averaged over the
    partner axis); the linear estimate is projected to the physical set.
    """
    labels1 = {l1 for l1, _ in counts}
    labels2 = {l2 for _, l2 in counts}
    flavors = (_flavor_of(labels1), _flavor_of(labels2))
    if len(counts) < 36:
        raise ValueError("two-qubit tomography needs the full 36-setting grid")
    exp = _axis_expectations_2q(counts, flavors)
    sig = {"x": _PAULI_1Q.operators[1], "y": _PAULI_1Q.operators[2],
           "z": _PAULI_1Q.operators[3]}
    eye = np.eye(2, dtype=complex)
    lin = np.kron(eye, eye).astype(complex)
    for a, val in exp["q1"].items():
        lin += val * np.kron(sig[a], eye)
    for b, val in exp["q2"].items():
        lin += val * np.kron(eye, sig[b])
    for (a, b), val in exp["joint"].items():
        lin += val * np.kron(sig[a], sig[b])
    return project_to_physical(lin / 4.0)


# ---------------------------------------------------------------------------
# process tomography
# ---------------------------------------------------------------------------

def _as_matrix(x) -> np.ndarray:
    if isinstance(x, DensityMatrix):
        return x.entries
    return np.asarray(x, dtype=complex)


def process_tomo(inputs, outputs, n: int) -> ProcessMatrix:
    """Reconstruct the chi matrix over the Pauli basis from input/output pairs.

    Solves Tr(P_k eps(rho_j)) = sum_mn chi_mn Tr(P_k E_m rho_j E_n+) in the
    least-squares sense, then Hermitizes, clips to PSD and normalizes
    Tr(chi) = 1.  Requires 4^n linearly independent inputs.
    """
    if n not in (1, 2):
        raise ValueError("n must be 1 or 2")
    basis = _PAULI_1Q if n == 1 else _PAULI_2Q
    rhos = [_as_matrix(r) for r in inputs]
    outs = [_as_matrix(r) for r in outputs]
    if len(rhos) != len(outs):
        raise ValueError("inputs and outputs must pair up")
    d = 2**n
    d2 = 4**n
    if len(rhos) < d2:
        raise ValueError(f"need at least {d2} input states, got {len(rhos)}")
    stack = np.array([r.reshape(-1) for r in rhos])
    if np.linalg.matrix_rank(stack, tol=1e-10) < d2:
        raise ValueError("input states are rank-deficient; cannot invert")
    e_ops = np.array(basis.operators)  # (d2, d, d)
    r_ops = np.array(rhos)             # (J, d, d)
    # X[m, j, n] = E_m rho_j E_n (E Hermitian)
    left = np.einsum("mab,jbc->mjac", e_ops, r_ops)
    x = np.einsum("mjac,ncd->mjnad", left, e_ops)
    # A[(j,k),(m,n)] = Tr(P_k X[m,j,n])
    a = np.einsum("kda,mjnad->jkmn", e_ops, x)
    a = a.reshape(len(rhos) * d2, d2 * d2)
    b = np.einsum("kda,jad->jk", e_ops, np.array(outs)).reshape(-1)
    chi_vec, *_ = np.linalg.lstsq(a, b, rcond=None)
    chi = chi_vec.reshape(d2, d2)
    chi = 0.5 * (chi + dagger(chi))
    evals, vecs = np.linalg.eigh(chi)
    evals = np.clip(evals, 0.0, None)
    chi = (vecs * evals) @ dagger(vecs)
    tr = float(np.trace(chi).real)
    if tr <= 0:
        raise ValueError("reconstructed chi has nonpositive trace")
    return ProcessMatrix(n, chi / tr)


def chi_from_unitary(u: np.ndarray) -> ProcessMatrix:
    """Chi matrix of a unitary process, chi_mn = c_m conj(c_n) with
    c_m = Tr(E_m U) / 2^n."""
    u = np.asarray(u, dtype=complex)
    d = u.shape[0]
    n = int(round(np.log2(d)))
    basis = _PAULI_1Q if n == 1 else _PAULI_2Q
    c = np.array([np.trace(e @ u) / d for e in basis.operators])
    chi = np.outer(c, c.conj())
    return ProcessMatrix(n, chi / float(np.trace(chi).real))


def process_fidelity(chi: ProcessMatrix, chi_ideal: ProcessMatrix) -> float:
    """F_chi = Tr(chi chi_i) / (Tr(chi) Tr(chi_i))."""
    if chi.n_qubits != chi_ideal.n_qubits:
        raise ValueError("qubit-count mismatch")
    t1 = float(np.trace(chi.chi).real)
    t2 = float(np.trace(chi_ideal.chi).real)
    if t1 == 0 or t2 == 0:
        raise ValueError("zero-trace chi matrix")
    return float(np.trace(chi.chi @ chi_ideal.chi).real) / (t1 * t2)


def process_purity(chi: ProcessMatrix) -> float:
    """P_chi = Tr(chi^2) / Tr(chi)^2; unity for a unitary process."""
    tr = float(np.trace(chi.chi).real)
    if tr == 0:
        raise ValueError("zero-trace chi matrix")
    return float(np.trace(chi.chi @ chi.chi).real) / tr**2


# ---------------------------------------------------------------------------
# fringe fitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FringeFit:
    """Least-squares fit of C(phi) = A (1 + V cos(phi + delta))."""

    visibility: float
    phase_offset: float
    amplitude: float
    visibility_raw: float
    visibility_subtracted: float
    visibility_stderr: float
    converged: bool


def _fit_cosine(phis, vals):
    a0 = float(np.mean(vals))
    v0 = (np.max(vals) - np.min(vals)) / max(np.max(vals) + np.min(vals), 1e-12)
    z = np.sum(vals * np.exp(-1j * phis))
    d0 = float(-np.angle(z)) if abs(z) > 0 else 0.0
    weights = 1.0 / np.sqrt(np.maximum(vals, 1.0))

    def resid(p):
        a, v, d = p
        return (a * (1.0 + v * np.cos(phis + d)) - vals) * weights

    fit = least_squares(resid, x0=[a0, min(max(v0, 0.0), 1.0), d0], max_nfev=5000)
    a, v, d = fit.x
    if v < 0:  # canonicalize: positive visibility, shifted phase
        v = -v
        d += np.pi
    d = float((d + np.pi) % (2 * np.pi) - np.pi)
    # Poisson-weighted covariance of the fit parameters
    j = fit.jac
    try:
        cov = np.linalg.inv(j.T @ j)
        v_err = float(np.sqrt(max(cov[1, 1], 0.0)))
    except np.linalg.LinAlgError:
        v_err = float("nan")
    return float(a), float(v), d, v_err, bool(fit.status > 0)


def fringe_fit(scan, background: float = 0.0) -> FringeFit:
    """Fit interference-fringe counts C(phi) = A (1 + V cos(phi + delta)).

    `scan` is a sequence of (phi, counts).  Needs at least 5 points spanning
    a period.  The raw visibility comes from the data as-is; the subtracted
    one from the data with the constant `background` (counts per point)
    removed.  A non-convergent fit is flagged, returning the best estimate.
    """
    phis = np.array([p for p, _ in scan], dtype=float)
    vals = np.array([c for _, c in scan], dtype=float)
    if len(phis) < 5:
        raise ValueError("need at least 5 fringe points")
    if phis.max() - phis.min() < 2 * np.pi * 0.99:
        raise ValueError("scan must span at least one period")
    a_raw, v_raw, d_raw, v_err, ok_raw = _fit_cosine(phis, vals)
    if background > 0:
        a_s, v_sub, d_s, _, ok_s = _fit_cosine(phis, np.maximum(vals - background, 0.0))
        ok = ok_raw and ok_s
    else:
        v_sub, ok = v_raw, ok_raw
    return FringeFit(
        visibility=float(v_raw),
        phase_offset=float(d_raw),
        amplitude=float(a_raw),
        visibility_raw=float(v_raw),
        visibility_subtracted=float(v_sub),
        visibility_stderr=v_err,
        converged=ok,
    )
