"""Driven-dissipative N-level systems with a ground-state sink.

Level 1 (index 0) is the ground state.  Excited levels ``2..N`` carry
detunings, real pairwise drives and decay rates into the ground state, and
may additionally be coupled by intra-excited quantum jumps.

Vectorization is row-major: ``|m><n|`` maps to basis index ``m*dim + n``
(0-based), i.e. ``vec(rho) = rho.reshape(-1)``.  With this convention
``vec(A rho B) = (A ⊗ B.T) vec(rho)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from .exact import GaussianRational, as_rational, exact_array, exact_eye

__all__ = [
    "ModelError",
    "OpenSystemSpec",
    "LindbladParts",
    "build_parts",
    "excited_first_permutation",
    "qubit_ep_parameters",
    "qutrit_ep_parameters",
    "PRESETS",
    "preset",
    "model_from_dict",
    "model_to_dict",
    "load_model",
    "dump_model",
    "MODEL_SCHEMA",
]


class ModelError(ValueError):
    """Invalid or inconsistent model description."""


@dataclass(frozen=True)
class OpenSystemSpec:
    """Declarative N-level open system.

    Parameters
    ----------
    n_levels
        Total number of levels including the ground state (N >= 2).
    detunings, sink_rates
        One entry per excited level 2..N.
    drives
        ``{(i, j): omega}`` with 1-based excited levels ``2 <= i < j <= N``.
    intra_jumps
        ``(matrix, rate)`` pairs.  Matrices are (N-1)x(N-1) on the excited
        subspace, or NxN with vanishing first row and column.
    labels
        Optional level names, ground first.
    """

    n_levels: int
    detunings: tuple = ()
    drives: dict = field(default_factory=dict)
    sink_rates: tuple = ()
    intra_jumps: tuple = ()
    labels: tuple | None = None

    def __post_init__(self):
        n = self.n_levels
        if not isinstance(n, (int, np.integer)) or n < 2:
            raise ModelError(f"n_levels must be an integer >= 2, got {n!r}")
        det = tuple(self.detunings) if len(self.detunings) else (0,) * (n - 1)
        sinks = tuple(self.sink_rates) if len(self.sink_rates) else (0,) * (n - 1)
        if len(det) != n - 1:
            raise ModelError(f"expected {n - 1} detunings, got {len(det)}")
        if len(sinks) != n - 1:
            raise ModelError(f"expected {n - 1} sink rates, got {len(sinks)}")
        for x in det + sinks:
            _check_real(x, "detunings and sink rates")
        if any(_num(g) < 0 for g in sinks):
            raise ModelError("sink rates must be non-negative")
        drives = {}
        for key, omega in dict(self.drives).items():
            i, j = (int(k) for k in key)
            if not 2 <= i < j <= n:
                raise ModelError(f"drive ({i}, {j}) must satisfy 2 <= i < j <= {n}")
            _check_real(omega, "drives")
            drives[(i, j)] = omega
        jumps = []
        for entry in self.intra_jumps:
            mat, rate = entry
            _check_real(rate, "jump rates")
            if _num(rate) < 0:
                raise ModelError("jump rates must be non-negative")
            jumps.append((_embed_jump(mat, n), rate))
        if self.labels is not None and len(self.labels) != n:
            raise ModelError(f"expected {n} labels, got {len(self.labels)}")
        object.__setattr__(self, "detunings", det)
        object.__setattr__(self, "sink_rates", sinks)
        object.__setattr__(self, "drives", drives)
        object.__setattr__(self, "intra_jumps", tuple(jumps))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def dim(self) -> int:
        """Dimension of the excited (effective) subspace."""
        return self.n_levels - 1

    def level_labels(self) -> tuple:
        if self.labels is not None:
            return self.labels
        return tuple(str(k) for k in range(1, self.n_levels + 1))

    def with_jump_rates(self, scale) -> "OpenSystemSpec":
        """Copy with every intra-jump rate multiplied by ``scale``."""
        jumps = tuple((m, r * scale) for m, r in self.intra_jumps)
        return OpenSystemSpec(
            self.n_levels, self.detunings, self.drives, self.sink_rates, jumps, self.labels
        )


def _num(x) -> float:
    return float(x)


def _check_real(x, what):
    if isinstance(x, (complex, np.complexfloating)):
        if x.imag != 0:
            raise ModelError(f"{what} must be real, got {x!r}")
    elif isinstance(x, GaussianRational):
        if x.im != 0:
            raise ModelError(f"{what} must be real, got {x}")
    elif not isinstance(x, (int, float, Fraction, np.integer, np.floating, str)):
        raise ModelError(f"{what} must be real numbers, got {type(x).__name__}")
    if isinstance(x, (float, np.floating)) and not math.isfinite(x):
        raise ModelError(f"{what} must be finite")


def _embed_jump(mat, n: int) -> np.ndarray:
    arr = np.asarray(mat)
    exact = arr.dtype == object
    if arr.shape == (n - 1, n - 1):
        full = np.full((n, n), GaussianRational(0), dtype=object) if exact else np.zeros(
            (n, n), dtype=complex
        )
        full[1:, 1:] = arr
        return full
    if arr.shape == (n, n):
        zero_rows = all(complex(x) == 0 for x in arr[0, :]) and all(
            complex(x) == 0 for x in arr[:, 0]
        )
        if not zero_rows:
            raise ModelError("intra jumps must act on the excited subspace only")
        return arr if exact else arr.astype(complex)
    raise ModelError(f"jump matrix shape {arr.shape} does not fit {n} levels")


@dataclass(frozen=True)
class LindbladParts:
    """All matrices derived from one :class:`OpenSystemSpec`.

    ``full_lindbladian`` and ``projector`` use the row-major vectorization of
    the full N-level system; ``permutation`` reorders that basis so that the
    (N-1)^2 purely-excited components come first (``L[p][:, p]``).
    """

    hamiltonian: np.ndarray
    h_eff: np.ndarray
    liouvillian_eff: np.ndarray
    lindbladian_eff: np.ndarray
    full_lindbladian: np.ndarray
    projector: np.ndarray
    permutation: np.ndarray

    def reordered(self) -> tuple[np.ndarray, np.ndarray]:
        """Full Lindbladian and projector in excited-first ordering."""
        p = self.permutation
        return self.full_lindbladian[np.ix_(p, p)], self.projector[np.ix_(p, p)]


def excited_first_permutation(n_levels: int) -> np.ndarray:
    """Indices of the vectorized basis with both levels excited listed first."""
    n = n_levels
    excited = [m * n + k for m in range(1, n) for k in range(1, n)]
    rest = [i for i in range(n * n) if i not in set(excited)]
    return np.array(excited + rest, dtype=int)


class _Backend:
    """Scalar plumbing shared by the float and exact builds."""

    def __init__(self, exact: bool):
        self.exact = exact
        self.i = GaussianRational(0, 1) if exact else 1j

    def scalar(self, x):
        if self.exact:
            return GaussianRational.coerce(as_rational(x) if not isinstance(
                x, (complex, GaussianRational, np.complexfloating)) else x)
        return complex(x)

    def zeros(self, n):
        if self.exact:
            return np.full((n, n), GaussianRational(0), dtype=object)
        return np.zeros((n, n), dtype=complex)

    def eye(self, n):
        return exact_eye(n) if self.exact else np.eye(n, dtype=complex)

    def matrix(self, m):
        return exact_array(m) if self.exact else np.asarray(m, dtype=complex)

    def dag(self, m):
        return m.conj().T if not self.exact else np.vectorize(
            lambda x: x.conjugate(), otypes=[object])(m).T

    def conj(self, m):
        return m.conj() if not self.exact else np.vectorize(
            lambda x: x.conjugate(), otypes=[object])(m)


def _lindblad_superop(be: _Backend, h_nh, jumps):
    """``(-i H_nh) ⊗ 1 + 1 ⊗ (i H_nh*)`` and the summed jump terms ``Γ L ⊗ L*``."""
    d = h_nh.shape[0]
    one = be.eye(d)
    coherent = np.kron(-be.i * h_nh, one) + np.kron(one, be.i * be.conj(h_nh))
    jump = be.zeros(d * d)
    for mat, rate in jumps:
        jump = jump + be.scalar(rate) * np.kron(mat, be.conj(mat))
    return coherent, jump


def build_parts(spec: OpenSystemSpec, exact: bool = False) -> LindbladParts:
    """Construct Ĥ, Ĥ_eff, 𝓛′_eff, 𝓛_eff, the full 𝓛 and the projector.

    With ``exact=True`` every matrix is an object array of
    :class:`~mbep.exact.GaussianRational`; float parameters are then read
    through their decimal representation.
    """
    be = _Backend(exact)
    n = spec.n_levels
    h = be.zeros(n)
    for k, delta in enumerate(spec.detunings, start=1):
        h[k, k] = be.scalar(delta)
    for (i, j), omega in spec.drives.items():
        h[i - 1, j - 1] = be.scalar(omega)
        h[j - 1, i - 1] = be.scalar(omega)

    intra = [(be.matrix(m), r) for m, r in spec.intra_jumps]
    sinks = []
    for k, gamma in enumerate(spec.sink_rates, start=1):
        op = be.zeros(n)
        op[0, k] = be.scalar(1)
        sinks.append((op, gamma))

    h_nh = h.copy()
    for mat, rate in intra + sinks:
        h_nh = h_nh - be.i * be.scalar(rate) / 2 * (be.dag(mat) @ mat)
    coherent, jumps = _lindblad_superop(be, h_nh, intra + sinks)
    full = coherent + jumps

    h_eff = h_nh[1:, 1:].copy()
    intra_eff = [(m[1:, 1:], r) for m, r in intra]
    liou, jump_eff = _lindblad_superop(be, h_eff, intra_eff)
    lind = liou + jump_eff

    p = be.zeros(n)
    for k in range(1, n):
        p[k, k] = be.scalar(1)
    projector = np.kron(p, p)
    return LindbladParts(
        hamiltonian=h,
        h_eff=h_eff,
        liouvillian_eff=liou,
        lindbladian_eff=lind,
        full_lindbladian=full,
        projector=projector,
        permutation=excited_first_permutation(n),
    )


# ----------------------------------------------------------------------
# EP conditions and presets
# ----------------------------------------------------------------------


def qubit_ep_parameters(gamma_i: float, gamma_e: float) -> tuple[float, complex]:
    """Drive and Ĥ_eff eigenvalue of the qubit second-order EP (zero detuning)."""
    if gamma_i == gamma_e:
        raise ModelError("equal decay rates give no EP (16 Ω² must be non-zero)")
    omega = abs(gamma_i - gamma_e) / 4
    return omega, complex(0.0, -(gamma_i + gamma_e) / 4)


def qutrit_ep_parameters(gamma_h: float, gamma_e: float) -> tuple[float, float, complex]:
    """Middle decay rate, drive and eigenvalue of the qutrit third-order EP.

    Assumes zero detunings, no h–e drive and equal h–i and i–e drives.
    """
    if gamma_h == gamma_e:
        raise ModelError("equal outer decay rates give a triple root without an EP")
    gamma_i = (gamma_h + gamma_e) / 2
    omega = (gamma_h - gamma_e) / (4 * math.sqrt(2))
    return gamma_i, omega, complex(0.0, -gamma_i / 2)


def _unit(n, row, col):
    m = np.zeros((n, n), dtype=complex)
    m[row, col] = 1
    return m


SIGMA_Y = np.array([[0, -1j], [1j, 0]])
DEPHASING_QUTRIT = np.array([[0, 0, -1], [0, 1, 0], [-1, 0, 0]], dtype=complex)


def _qubit(gamma_i, gamma_e, omega, jumps, delta_i=0.0, delta_e=0.0):
    if omega is None:
        omega = qubit_ep_parameters(gamma_i, gamma_e)[0]
    return OpenSystemSpec(
        n_levels=3,
        detunings=(delta_i, delta_e),
        drives={(2, 3): omega},
        sink_rates=(gamma_i, gamma_e),
        intra_jumps=jumps,
        labels=("g", "i", "e"),
    )


def _qutrit(gamma_h, gamma_e, gamma_i, omega, jumps):
    if gamma_i is None:
        gamma_i = (gamma_h + gamma_e) / 2
    if omega is None:
        omega = qutrit_ep_parameters(gamma_h, gamma_e)[1]
    return OpenSystemSpec(
        n_levels=4,
        detunings=(0.0, 0.0, 0.0),
        drives={(2, 3): omega, (3, 4): omega},
        sink_rates=(gamma_h, gamma_i, gamma_e),
        intra_jumps=jumps,
        labels=("g", "h", "i", "e"),
    )


def _preset_qubit_i(gamma_i, gamma_e, omega=None, jump_rate=0.0, delta_i=0.0, delta_e=0.0):
    # excited basis (i, e): |e><i|
    return _qubit(gamma_i, gamma_e, omega, [(_unit(2, 1, 0), jump_rate)], delta_i, delta_e)


def _preset_qubit_ii(gamma_i, gamma_e, omega=None, jump_rate=0.0, delta_i=0.0, delta_e=0.0):
    return _qubit(gamma_i, gamma_e, omega, [(SIGMA_Y, jump_rate)], delta_i, delta_e)


def _preset_qutrit_i(gamma_h, gamma_e, omega=None, jump_rate=0.0, gamma_i=None):
    # excited basis (h, i, e): |i><h|, |e><h|, |e><i|
    jumps = [(_unit(3, 1, 0), jump_rate), (_unit(3, 2, 0), jump_rate), (_unit(3, 2, 1), jump_rate)]
    return _qutrit(gamma_h, gamma_e, gamma_i, omega, jumps)


def _preset_qutrit_ii(gamma_h, gamma_e, omega=None, jump_rate=0.0, gamma_i=None):
    return _qutrit(gamma_h, gamma_e, gamma_i, omega, [(DEPHASING_QUTRIT, jump_rate)])


PRESETS = {
    "qubit_i": _preset_qubit_i,
    "qubit_ii": _preset_qubit_ii,
    "qutrit_i": _preset_qutrit_i,
    "qutrit_ii": _preset_qutrit_ii,
}


def preset(name: str, **params) -> OpenSystemSpec:
    """One of the four model families with their intra-excited jumps.

    ``qubit_*`` take ``gamma_i, gamma_e`` (and optional ``omega``,
    ``jump_rate``, detunings); ``qutrit_*`` take ``gamma_h, gamma_e``
    (optional ``omega``, ``jump_rate``, ``gamma_i``).  A missing ``omega``
    selects the EP drive of the jump-free effective Hamiltonian.
    """
    try:
        builder = PRESETS[name]
    except KeyError:
        raise ModelError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    try:
        return builder(**params)
    except TypeError as exc:
        raise ModelError(f"bad parameters for preset {name!r}: {exc}") from None


# ----------------------------------------------------------------------
# JSON model files
# ----------------------------------------------------------------------

MODEL_SCHEMA = json.loads(resources.files("mbep").joinpath("data/model.schema.json").read_text())


def model_from_dict(doc: dict) -> OpenSystemSpec:
    """Validate a JSON model document and build the :class:`OpenSystemSpec`.

    The document either describes the model explicitly (``n_levels`` and
    friends) or names a preset: ``{"preset": {"name": ..., "params": {...}}}``.
    A ``command`` block, if present, is ignored here.
    """
    import jsonschema

    try:
        jsonschema.validate(doc, MODEL_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ModelError(f"invalid model document: {exc.message}") from None
    if "preset" in doc:
        if "n_levels" in doc:
            raise ModelError("give either a preset or an explicit model, not both")
        return preset(doc["preset"]["name"], **doc["preset"].get("params", {}))
    n = doc["n_levels"]
    drives = {(d["i"], d["j"]): d["omega"] for d in doc.get("drives", [])}
    jumps = []
    for entry in doc.get("intra_jumps", []):
        mat = np.array([[complex(re, im) for re, im in row] for row in entry["matrix"]])
        jumps.append((mat, entry["rate"]))
    return OpenSystemSpec(
        n_levels=n,
        detunings=tuple(doc.get("detunings", [])),
        drives=drives,
        sink_rates=tuple(doc.get("sink_rates", [])),
        intra_jumps=tuple(jumps),
        labels=tuple(doc["labels"]) if "labels" in doc else None,
    )


def model_to_dict(spec: OpenSystemSpec) -> dict:
    doc = {
        "n_levels": spec.n_levels,
        "detunings": [float(x) for x in spec.detunings],
        "drives": [
            {"i": i, "j": j, "omega": float(w)} for (i, j), w in sorted(spec.drives.items())
        ],
        "sink_rates": [float(x) for x in spec.sink_rates],
        "intra_jumps": [
            {
                "matrix": [[[complex(x).real, complex(x).imag] for x in row] for row in m[1:, 1:]],
                "rate": float(r),
            }
            for m, r in spec.intra_jumps
        ],
    }
    if spec.labels is not None:
        doc["labels"] = list(spec.labels)
    return doc


def load_model(path) -> OpenSystemSpec:
    with open(Path(path)) as fh:
        return model_from_dict(json.load(fh))


def dump_model(spec: OpenSystemSpec, path) -> None:
    with open(Path(path), "w") as fh:
        json.dump(model_to_dict(spec), fh, indent=2)
        fh.write("\n")
