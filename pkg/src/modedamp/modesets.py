"""Exact integer-lattice combinatorics of symmetric mode sets.

All classification predicates run in exact integer arithmetic: whether two
wavevectors lie on a common circle centered at the origin (equal squared
moduli) or on a common line through the origin (vanishing determinant) is
an algebraic property and must not depend on floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .lattice import Lattice

Mode = tuple[int, int]


class PairClass(Enum):
    C_DEGENERATE = "c_degenerate"  # same circle centered at the origin
    L_DEGENERATE = "l_degenerate"  # same line through the origin
    BOTH = "both"                  # only possible for l = -k
    NON_DEGENERATE = "non_degenerate"


def pair_class(k: Mode, l: Mode) -> PairClass:
    """Classify an unordered pair of distinct nonzero lattice points."""
    if k == (0, 0) or l == (0, 0):
        raise ValueError("pair members must be nonzero")
    if k == l:
        raise ValueError("pair members must be distinct")
    circle = k[0] ** 2 + k[1] ** 2 == l[0] ** 2 + l[1] ** 2
    line = k[0] * l[1] - k[1] * l[0] == 0
    if circle and line:
        return PairClass.BOTH
    if circle:
        return PairClass.C_DEGENERATE
    if line:
        return PairClass.L_DEGENERATE
    return PairClass.NON_DEGENERATE


def is_degenerate_pair(k: Mode, l: Mode) -> bool:
    return pair_class(k, l) is not PairClass.NON_DEGENERATE


@dataclass(frozen=True)
class ModeSet:
    """A finite or cofinite symmetric subset of Z^2 \\ {0}.

    For kind == "finite", `members` is the set itself.  For kind ==
    "cofinite", `members` is the finite complement within Z^2 \\ {0}; the
    set consists of every other nonzero wavevector.
    """

    kind: str
    members: frozenset

    def __post_init__(self):
        if self.kind not in ("finite", "cofinite"):
            raise ValueError(f"unknown mode-set kind {self.kind!r}")
        for k in self.members:
            if k == (0, 0):
                raise ValueError("mode sets exclude the origin")
            if (-k[0], -k[1]) not in self.members:
                raise ValueError(f"mode set is not symmetric: missing {(-k[0], -k[1])} for {k}")

    @classmethod
    def finite(cls, modes) -> "ModeSet":
        return cls("finite", frozenset(tuple(m) for m in modes))

    @classmethod
    def cofinite(cls, damped_modes) -> "ModeSet":
        return cls("cofinite", frozenset(tuple(m) for m in damped_modes))

    @classmethod
    def empty(cls) -> "ModeSet":
        return cls("finite", frozenset())

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ModeSet":
        return cls(doc["kind"], frozenset(tuple(m) for m in doc["members"]))

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "members": sorted(map(list, self.members))}

    def contains(self, k: Mode) -> bool:
        if k == (0, 0):
            return False
        inside = tuple(k) in self.members
        return inside if self.kind == "finite" else not inside

    def member_mask(self, lattice: Lattice) -> np.ndarray:
        """Boolean array over the lattice, True where the mode belongs to
        the set.  The origin is always False."""
        mask = np.zeros((lattice.size, lattice.size), dtype=bool)
        for k in self.members:
            if lattice.contains(k):
                mask[lattice.index(k)] = True
        if self.kind == "cofinite":
            mask = ~mask
            mask[lattice.origin] = False
        return mask


@dataclass(frozen=True)
class DegeneracyReport:
    """Outcome of classifying a finite symmetric set.

    For degenerate sets the witness is the shared circle radius (squared)
    or the primitive line direction.  For non-degenerate sets star_witness
    holds (m, (k, l)): a mode m outside the set that is the sum of exactly
    one non-degenerate pair drawn from it.
    """

    is_degenerate: bool
    witness_kind: str  # "circle" | "line" | "none"
    circle_radius_sq: int | None = None
    line_direction: Mode | None = None
    star_witness: tuple | None = None
    is_empty: bool = False

    def to_json_dict(self) -> dict:
        doc = {"is_degenerate": self.is_degenerate, "witness_kind": self.witness_kind}
        if self.circle_radius_sq is not None:
            doc["circle_radius_sq"] = self.circle_radius_sq
        if self.line_direction is not None:
            doc["line_direction"] = list(self.line_direction)
        if self.star_witness is not None:
            m, (k, l) = self.star_witness
            doc["star_witness"] = {"m": list(m), "pair": [list(k), list(l)]}
        if self.is_empty:
            doc["is_empty"] = True
        return doc


def _primitive_direction(k: Mode) -> Mode:
    g = math.gcd(abs(k[0]), abs(k[1]))
    d = (k[0] // g, k[1] // g)
    if d[0] < 0 or (d[0] == 0 and d[1] < 0):
        d = (-d[0], -d[1])
    return d


def classify_set(s: ModeSet) -> DegeneracyReport:
    """Decide whether every pair in a finite symmetric set is degenerate.

    A set is degenerate exactly when all members lie on one circle
    centered at the origin or on one line through the origin.
    """
    if s.kind != "finite":
        raise ValueError("classification applies to finite sets")
    members = sorted(s.members)
    if not members:
        return DegeneracyReport(True, "none", is_empty=True)
    radii = {k[0] ** 2 + k[1] ** 2 for k in members}
    if len(radii) == 1:
        return DegeneracyReport(True, "circle", circle_radius_sq=radii.pop())
    directions = {_primitive_direction(k) for k in members}
    if len(directions) == 1:
        return DegeneracyReport(True, "line", line_direction=directions.pop())
    witness = find_star_witness(s)
    if witness is None:
        raise AssertionError(
            "non-degenerate symmetric set without a sum witness; this "
            "contradicts the finite-support steadiness theorem"
        )
    return DegeneracyReport(False, "none", star_witness=witness)


def find_star_witness(s: ModeSet):
    """Search for a nonzero mode m outside the set that is the sum k + l of
    exactly one non-degenerate unordered pair {k, l} of set members.

    The search is exhaustive over all pairs.  Among valid witnesses the one
    minimizing |m|^2 is returned, ties broken lexicographically on
    (m1, m2).  Returns None when no witness exists (degenerate sets).
    """
    if s.kind != "finite":
        raise ValueError("witness search applies to finite sets")
    members = sorted(s.members)
    sums: dict[Mode, list] = {}
    for i, k in enumerate(members):
        for l in members[i + 1:]:
            if pair_class(k, l) is not PairClass.NON_DEGENERATE:
                continue
            m = (k[0] + l[0], k[1] + l[1])
            sums.setdefault(m, []).append((k, l))
    candidates = [
        (m, pairs[0])
        for m, pairs in sums.items()
        if len(pairs) == 1 and m != (0, 0) and not s.contains(m)
    ]
    if not candidates:
        return None
    candidates.sort(key=lambda c: (c[0][0] ** 2 + c[0][1] ** 2, c[0]))
    return candidates[0]


def kappa_max(k_set: ModeSet) -> float:
    """Largest |k| over a finite set (0 for the empty set)."""
    if k_set.kind != "finite":
        raise ValueError("kappa_max is defined for finite sets")
    if not k_set.members:
        return 0.0
    return math.sqrt(max(k[0] ** 2 + k[1] ** 2 for k in k_set.members))


def kappa_min(k_set: ModeSet, lattice: Lattice) -> int:
    """Smallest |k|^2 over retained lattice modes outside the set.

    Note the asymmetry with kappa_max: this one is a squared modulus.
    """
    best = None
    n = lattice.max_wavenumber
    for a in range(-n, n + 1):
        for b in range(-n, n + 1):
            k = (a, b)
            if k == (0, 0) or k_set.contains(k):
                continue
            q = a * a + b * b
            if best is None or q < best:
                best = q
    if best is None:
        raise ValueError("the set covers the whole lattice")
    return best


def linf_growth_constant(damped: ModeSet) -> float:
    """Sharp constant c with ||projection of Laplacian onto the damped
    modes applied to w||_inf <= c ||w||_L2, for a finite damped complement.

    By Cauchy-Schwarz over the finite damped set D the best constant is
    sqrt(sum_{k in D} |k|^4) / (2 pi), attained by aligning phases.
    """
    if damped.kind != "finite":
        raise ValueError("the damped complement must be finite")
    total = sum((k[0] ** 2 + k[1] ** 2) ** 2 for k in damped.members)
    return math.sqrt(total) / (2.0 * math.pi)


def coupling_constant_estimate(
    k_set: ModeSet,
    lattice: Lattice,
    n_restarts: int = 4,
    n_iters: int = 60,
    seed: int = 0,
) -> float:
    """Best constant c in ||u_D grad(w_K)||_L2 <= c ||w_D||_L2 ||w_K||_L2
    on the truncated lattice, for finite K.

    The bilinear map (w_D, w_K) -> u_D . grad(w_K), with u_D the velocity
    of the part supported outside K and w_K the part supported in K, is a
    finite-rank restriction on the lattice.  Its norm is found by
    alternating power iteration over the two arguments, with random
    restarts.  The value is a lattice-dependent lower approximation of the
    true supremum and is non-decreasing under lattice refinement.
    """
    if k_set.kind != "finite":
        raise ValueError("the undamped set must be finite")
    inside = [k for k in sorted(k_set.members) if lattice.contains(k)]
    if len(inside) != len(k_set.members):
        raise ValueError("the set does not fit inside the lattice")
    if not inside:
        return 0.0

    in_mask = k_set.member_mask(lattice)
    out_mask = ~in_mask
    out_mask[lattice.origin] = False

    rng = np.random.default_rng(seed)

    # exact bilinear tensor in spectral coordinates: contributions
    # (1/2pi) det(k,l)/|k|^2 for k outside K, l in K, output mode k+l
    # (the output lattice is unrestricted, matching the L2 product norm)
    n = lattice.max_wavenumber
    out_modes = [tuple(m) for m in np.argwhere(out_mask)]
    li = {m: i for i, m in enumerate(out_modes)}
    nin = len(inside)
    nout = len(out_modes)
    # triple tensor entries: (out index, in index, output mode key, coef)
    entries = []
    out_keys = {}
    for oi, (a, b) in enumerate(out_modes):
        kk = (a - n, b - n)
        for ii, l in enumerate(inside):
            det = kk[0] * l[1] - kk[1] * l[0]
            if det == 0:
                continue
            coef = det / (kk[0] ** 2 + kk[1] ** 2) / (2.0 * np.pi)
            m = (kk[0] + l[0], kk[1] + l[1])
            mi = out_keys.setdefault(m, len(out_keys))
            entries.append((oi, ii, mi, coef))
    if not entries:
        return 0.0
    ent = np.array([(e[0], e[1], e[2]) for e in entries], dtype=np.int64)
    coefs = np.array([e[3] for e in entries])
    nprod = len(out_keys)

    best = 0.0
    for _ in range(n_restarts):
        wd = np.zeros(nout, dtype=np.complex128)
        wk = np.zeros(nin, dtype=np.complex128)
        wd[:] = rng.standard_normal(nout) + 1j * rng.standard_normal(nout)
        wk[:] = rng.standard_normal(nin) + 1j * rng.standard_normal(nin)
        # impose reality through the set symmetry
        wd = _sym_project(wd, out_modes, li, n)
        wk = _sym_project_modes(wk, inside)
        wd /= np.linalg.norm(wd)
        wk /= np.linalg.norm(wk)
        val = 0.0
        for _ in range(n_iters):
            # fix wk, power-iterate wd through B* B
            prod = np.zeros(nprod, dtype=np.complex128)
            np.add.at(prod, ent[:, 2], coefs * wd[ent[:, 0]] * wk[ent[:, 1]])
            back = np.zeros(nout, dtype=np.complex128)
            np.add.at(back, ent[:, 0], np.conj(coefs * wk[ent[:, 1]]) * prod[ent[:, 2]])
            wd = _sym_project(back, out_modes, li, n)
            nd = np.linalg.norm(wd)
            if nd == 0:
                break
            wd /= nd
            # fix wd, power-iterate wk
            prod[:] = 0
            np.add.at(prod, ent[:, 2], coefs * wd[ent[:, 0]] * wk[ent[:, 1]])
            back_k = np.zeros(nin, dtype=np.complex128)
            np.add.at(back_k, ent[:, 1], np.conj(coefs * wd[ent[:, 0]]) * prod[ent[:, 2]])
            wk = _sym_project_modes(back_k, inside)
            nk = np.linalg.norm(wk)
            if nk == 0:
                break
            wk /= nk
            prod[:] = 0
            np.add.at(prod, ent[:, 2], coefs * wd[ent[:, 0]] * wk[ent[:, 1]])
            val = float(np.linalg.norm(prod))
        best = max(best, val)
    return best


def _sym_project(vec, out_modes, index_of, n):
    """Hermitian projection in the flat out-of-set coordinates."""
    out = np.empty_like(vec)
    for i, (a, b) in enumerate(out_modes):
        j = index_of[(2 * n - a, 2 * n - b)]
        out[i] = 0.5 * (vec[i] + np.conj(vec[j]))
    return out


def _sym_project_modes(vec, modes):
    index_of = {m: i for i, m in enumerate(modes)}
    out = np.empty_like(vec)
    for i, k in enumerate(modes):
        j = index_of[(-k[0], -k[1])]
        out[i] = 0.5 * (vec[i] + np.conj(vec[j]))
    return out
