"""Polytopes, cone specifications and dense-matrix helpers."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import StructuralError, ValidationError

DEFAULT_TOL = 1e-9

# block kinds understood by the projection kernel
ZERO = 0
ORTHANT = 1
SOC = 2

_KIND_NAMES = {"zero": ZERO, "orthant": ORTHANT, "soc": SOC}


def as_matrix(data, name="matrix", ndim=2) -> np.ndarray:
    """Return a read-only float64 copy of ``data``; reject NaN/Inf."""
    arr = np.array(data, dtype=np.float64)
    if ndim == 2 and arr.ndim == 1 and arr.size == 0:
        arr = arr.reshape(0, 0)
    if arr.ndim != ndim:
        raise StructuralError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise StructuralError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


def as_vector(data, name="vector") -> np.ndarray:
    return as_matrix(data, name=name, ndim=1)


@dataclass(frozen=True)
class Block:
    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in _KIND_NAMES:
            raise StructuralError(f"unknown cone block type {self.kind!r}")
        if int(self.dim) < 1:
            raise StructuralError(f"cone block dimension must be >= 1, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))


def Orthant(d: int) -> Block:
    return Block("orthant", d)


def SecondOrder(d: int) -> Block:
    """``x`` in SOC_d iff ``||x[1:]|| <= x[0]``."""
    return Block("soc", d)


def Zero(d: int) -> Block:
    # equality rows inside the conic solver only; never part of a user cone
    return Block("zero", d)


@dataclass(frozen=True)
class ConeSpec:
    """Finite product of nonnegative orthants and second-order cones."""

    blocks: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        for b in self.blocks:
            if not isinstance(b, Block):
                raise StructuralError(f"cone blocks must be Block instances, got {b!r}")

    @property
    def total_dim(self) -> int:
        return sum(b.dim for b in self.blocks)

    def dual(self) -> "ConeSpec":
        # orthants and Lorentz cones are self-dual
        return self

    def arrays(self):
        kinds = np.array([_KIND_NAMES[b.kind] for b in self.blocks], dtype=np.int64)
        dims = np.array([b.dim for b in self.blocks], dtype=np.int64)
        return kinds, dims

    def interior_point(self) -> np.ndarray:
        """A point in the interior: ones on orthants, ``e_1`` on SOC blocks."""
        out = np.zeros(self.total_dim)
        off = 0
        for b in self.blocks:
            if b.kind == "orthant":
                out[off:off + b.dim] = 1.0
            elif b.kind == "soc":
                out[off] = 1.0
            off += b.dim
        return out

    def contains(self, x, tol=DEFAULT_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.total_dim,):
            raise StructuralError(f"vector of length {x.shape} does not match cone dim {self.total_dim}")
        off = 0
        for b in self.blocks:
            seg = x[off:off + b.dim]
            if b.kind == "orthant" and np.any(seg < -tol):
                return False
            if b.kind == "soc" and np.linalg.norm(seg[1:]) > seg[0] + tol:
                return False
            if b.kind == "zero" and np.any(np.abs(seg) > tol):
                return False
            off += b.dim
        return True

    def __add__(self, other: "ConeSpec") -> "ConeSpec":
        return ConeSpec(self.blocks + other.blocks)

    def to_dict(self) -> dict:
        return {"blocks": [{"type": b.kind, "dim": b.dim} for b in self.blocks]}

    @classmethod
    def from_dict(cls, d: dict) -> "ConeSpec":
        try:
            blocks = d["blocks"]
        except (KeyError, TypeError):
            raise StructuralError("cone spec needs a 'blocks' list") from None
        out = []
        for b in blocks:
            kind = b.get("type")
            if kind not in ("orthant", "soc"):
                raise StructuralError(f"cone block type must be 'orthant' or 'soc', got {kind!r}")
            out.append(Block(kind, int(b["dim"])))
        return cls(tuple(out))

    @classmethod
    def orthant(cls, m: int) -> "ConeSpec":
        return cls((Orthant(m),)) if m > 0 else cls(())

    @classmethod
    def parse(cls, text: str) -> "ConeSpec":
        """Parse the CLI shorthand, e.g. ``"orthant:3,soc:4"`` or ``"none"``."""
        text = text.strip()
        if text in ("", "none", "zero"):
            return cls(())
        blocks = []
        for part in text.split(","):
            kind, _, dim = part.partition(":")
            if kind.strip() not in ("orthant", "soc") or not dim.strip().isdigit():
                raise StructuralError(f"bad cone block {part!r}; expected orthant:<d> or soc:<d>")
            blocks.append(Block(kind.strip(), int(dim)))
        return cls(tuple(blocks))


@dataclass(frozen=True)
class Polytope:
    """``{x : H^T x <= 1}`` together with its vertex list.

    ``H`` is n x f (column i is the facet normal h_i) and ``V`` is n x v
    (column j is the vertex p_j). Both representations are required.
    """

    H: np.ndarray
    V: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        H = as_matrix(self.H, "H")
        V = as_matrix(self.V, "V")
        if H.shape[0] != V.shape[0]:
            raise StructuralError(
                f"H has {H.shape[0]} rows but V has {V.shape[0]}; both must have n rows")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "dim", H.shape[0])

    @property
    def n_facets(self) -> int:
        return self.H.shape[1]

    @property
    def n_vertices(self) -> int:
        return self.V.shape[1]

    def slacks(self) -> np.ndarray:
        return 1.0 - self.H.T @ self.V

    def contains(self, x, tol=DEFAULT_TOL) -> bool:
        return bool(np.all(self.H.T @ np.asarray(x, dtype=float) <= 1.0 + tol))

    def gauge(self, x) -> float:
        """Minkowski gauge ``max_i <h_i, x>`` (finite because 0 is interior)."""
        return float(max(0.0, np.max(self.H.T @ np.asarray(x, dtype=float))))

    @classmethod
    def from_rows(cls, facets, vertices, rhs=None) -> "Polytope":
        """Build from facet rows ``<h, x> <= b`` and vertex rows.

        Rows are rescaled to right-hand side 1; ``b <= 0`` is rejected
        because the origin must be interior.
        """
        Hr = as_matrix(facets, "H")
        Vr = as_matrix(vertices, "V")
        if rhs is not None:
            b = as_vector(rhs, "b")
            if b.shape != (Hr.shape[0],):
                raise StructuralError("rhs length must equal the number of facet rows")
            bad = np.flatnonzero(b <= 0)
            if bad.size:
                raise ValidationError(
                    f"facet rows {[int(i) + 1 for i in bad]} have right-hand side <= 0; "
                    "the origin must be interior",
                    [f"row {int(i) + 1} has b <= 0" for i in bad])
            Hr = Hr / b[:, None]
        return cls(Hr.T, Vr.T)

    def to_dict(self) -> dict:
        return {"n": self.dim, "H": self.H.T.tolist(), "V": self.V.T.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Polytope":
        try:
            n, H, V = int(d["n"]), d["H"], d["V"]
        except (KeyError, TypeError, ValueError):
            raise StructuralError("polytope document needs keys 'n', 'H', 'V'") from None
        P = cls.from_rows(H, V, d.get("b"))
        if P.dim != n:
            raise StructuralError(f"declared n={n} but rows have length {P.dim}")
        return P


@dataclass
class ValidationReport:
    violations: list

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.valid

    def __str__(self):
        if self.valid:
            return "valid"
        return "\n".join(self.violations)


def validate_polytope(P: Polytope, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Check the standing assumptions on ``(H, V)``.

    Dimension mismatches raise :class:`StructuralError`; everything else is
    collected as a violation. Facet-irredundancy is only checked through the
    weaker surrogate "no facet is tight at every vertex".
    """
    if not isinstance(P, Polytope):
        raise StructuralError("expected a Polytope")
    n, f, v = P.dim, P.n_facets, P.n_vertices
    violations = []
    if f < n + 1:
        violations.append(f"only {f} facets; need at least n+1 = {n + 1}")
    if v < n + 1:
        violations.append(f"only {v} vertices; need at least n+1 = {n + 1}")
    if f == 0 or v == 0:
        return ValidationReport(violations)
    S = P.slacks()
    for i, j in zip(*np.nonzero(S < -tol)):
        violations.append(
            f"vertex {j + 1} violates facet {i + 1} (slack {S[i, j]:.3g})")
    tight = np.abs(S) <= tol
    for i in np.flatnonzero(tight.all(axis=1)):
        violations.append(f"row {i + 1} tight at every vertex; polytope not full-dimensional")
    for j in np.flatnonzero(tight.sum(axis=0) < n):
        violations.append(f"column {j + 1} not a vertex (tight in {int(tight[:, j].sum())} < {n} facets)")
    return ValidationReport(violations)


def require_valid(P: Polytope, tol: float = DEFAULT_TOL) -> Polytope:
    report = validate_polytope(P, tol)
    if not report.valid:
        raise ValidationError("invalid polytope:\n" + str(report), report.violations)
    return P


def polar(P: Polytope, tol: float = DEFAULT_TOL) -> Polytope:
    """Polar polytope: facet normals and vertices exchange roles."""
    require_valid(P, tol)
    return Polytope(P.V, P.H)


def same_columns(X: np.ndarray, Y: np.ndarray, tol: float = 0.0) -> bool:
    """True if ``X`` and ``Y`` have the same columns up to permutation."""
    if X.shape != Y.shape:
        return False
    kx = np.lexsort(X[::-1])
    ky = np.lexsort(Y[::-1])
    return bool(np.all(np.abs(X[:, kx] - Y[:, ky]) <= tol))


def block_slices(cone: ConeSpec) -> Sequence[slice]:
    out, off = [], 0
    for b in cone.blocks:
        out.append(slice(off, off + b.dim))
        off += b.dim
    return out
