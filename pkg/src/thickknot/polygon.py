"""Closed polygon geometry: length, Rawdon-style thickness, ropelength.

A polygon is a cyclic list of 3-vectors with an implicit closing edge.
Thickness is the polygonal analogue min(MinRad, dcsd/2), where MinRad is
the smallest radius of the circular arc tangent to the two edges at a
vertex and dcsd is the doubly-critical self-distance over nonadjacent
edge pairs.  All geometry is double precision; tolerances are relative
to the bounding-box diameter.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateAngle, InvalidPolygon, NoCriticalChord

EDGE_TOL = 1e-9    # minimum edge length, relative to bbox diameter
EMBED_TOL = 1e-9   # minimum nonadjacent edge clearance, relative
ANGLE_TOL = 1e-7   # turning angles must stay below pi - ANGLE_TOL (radians)
COLLINEAR_TOL = 1e-12  # turning angles below this count as straight

ChordEnd = Tuple[int, float]          # (edge index, parameter in [0, 1])
Chord = Tuple[ChordEnd, ChordEnd]


class Polygon3:
    """Embedded closed polygon in 3-space.

    Vertices are stored as an immutable (n, 3) float array; the edge from
    the last vertex back to the first is implicit.  Construction validates
    the embeddedness and nondegeneracy invariants.
    """

    __slots__ = ("vertices", "_diameter")

    def __init__(self, vertices, validate: bool = True):
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 3:
            raise InvalidPolygon("vertices must be an (n, 3) array")
        v = v.copy()
        v.setflags(write=False)
        self.vertices = v
        self._diameter = float(np.linalg.norm(v.max(axis=0) - v.min(axis=0)))
        if validate:
            self._validate()

    def _validate(self):
        v = self.vertices
        n = len(v)
        if n < 3:
            raise InvalidPolygon("need at least 3 vertices")
        if not np.all(np.isfinite(v)):
            raise InvalidPolygon("vertices must be finite")
        diam = self._diameter
        if diam == 0.0:
            raise InvalidPolygon("all vertices coincide")
        lengths = self.edge_lengths()
        if lengths.min() < EDGE_TOL * diam:
            raise InvalidPolygon(
                f"edge {int(lengths.argmin())} shorter than {EDGE_TOL:g} * diameter")
        alpha = self.turning_angles()
        if alpha.max() > math.pi - ANGLE_TOL:
            raise InvalidPolygon(
                f"turning angle at vertex {int(alpha.argmax())} too close to pi")
        gap = min_nonadjacent_gap(v)
        if gap < EMBED_TOL * diam:
            raise InvalidPolygon(
                f"nonadjacent edges closer than {EMBED_TOL:g} * diameter (gap={gap:g})")

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def diameter(self) -> float:
        """Bounding-box diagonal; the reference scale for tolerances."""
        return self._diameter

    def edges(self) -> np.ndarray:
        v = self.vertices
        return np.roll(v, -1, axis=0) - v

    def edge_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.edges(), axis=1)

    def turning_angles(self) -> np.ndarray:
        """Exterior angle at each vertex, in [0, pi]."""
        e = self.edges()
        ln = np.linalg.norm(e, axis=1)
        d = e / ln[:, None]
        prev = np.roll(d, 1, axis=0)
        cosx = np.clip(np.einsum("ij,ij->i", prev, d), -1.0, 1.0)
        return np.arccos(cosx)

    def vertex_bytes(self) -> bytes:
        """Exact fingerprint used to unify identical samples."""
        return self.vertices.tobytes()

    def scaled(self, s: float) -> "Polygon3":
        return Polygon3(self.vertices * s, validate=False)

    def transformed(self, rot: np.ndarray, shift=(0.0, 0.0, 0.0)) -> "Polygon3":
        return Polygon3(self.vertices @ np.asarray(rot).T + np.asarray(shift, dtype=float))

    # -- file format: {"vertices": [[x, y, z], ...]}, closure implicit --

    def to_json(self) -> str:
        return json.dumps({"vertices": self.vertices.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "Polygon3":
        data = json.loads(text)
        if not isinstance(data, dict) or "vertices" not in data:
            raise InvalidPolygon("polygon JSON must be {\"vertices\": [[x,y,z], ...]}")
        return cls(data["vertices"])

    def __repr__(self):
        return f"Polygon3(n={self.n}, diameter={self._diameter:.6g})"


@dataclass(frozen=True)
class ThicknessReport:
    min_rad: float
    dcsd: float
    thickness: float
    argmin_vertex: Optional[int]
    argmin_chord: Optional[Chord]


def total_length(P: Polygon3) -> float:
    return float(P.edge_lengths().sum())


def min_rad(P: Polygon3, return_argmin: bool = False):
    """Smallest tangent-arc radius over vertices.

    A vertex with zero turning angle is a straight point of the curve and
    contributes +inf.  Angles near pi were rejected at construction; if one
    slips through on a raw array, DegenerateAngle is raised.
    """
    lengths = P.edge_lengths()
    alpha = P.turning_angles()
    if alpha.max() > math.pi - ANGLE_TOL:
        raise DegenerateAngle(f"turning angle {alpha.max():.6g} at vertex "
                              f"{int(alpha.argmax())} too close to pi")
    prev = np.roll(lengths, 1)
    adj = np.minimum(prev, lengths)
    with np.errstate(divide="ignore"):
        radii = np.where(alpha > COLLINEAR_TOL,
                         adj / (2.0 * np.tan(alpha / 2.0)), np.inf)
    if not np.isfinite(radii).any():
        raise DegenerateAngle("all vertices collinear; not a closed polygon")
    k = int(radii.argmin())
    if return_argmin:
        return float(radii[k]), k
    return float(radii[k])


def _segment_gap(p0, p1, q0, q1):
    """Minimum distance between segment batches [p0,p1] and [q0,q1].

    All arguments are (m, 3) arrays; returns (m,) distances.  Closed-form
    clamped closest points (Ericson); assumes nonzero segment lengths,
    which Polygon3 validation guarantees.
    """
    d1 = p1 - p0
    d2 = q1 - q0
    r = p0 - q0
    a = np.einsum("ij,ij->i", d1, d1)
    e = np.einsum("ij,ij->i", d2, d2)
    f = np.einsum("ij,ij->i", d2, r)
    c = np.einsum("ij,ij->i", d1, r)
    b = np.einsum("ij,ij->i", d1, d2)
    denom = a * e - b * b
    safe = np.where(denom > 1e-14 * a * e, denom, 1.0)
    s = np.where(denom > 1e-14 * a * e,
                 np.clip((b * f - c * e) / safe, 0.0, 1.0), 0.0)
    t = np.clip((b * s + f) / e, 0.0, 1.0)
    s = np.clip((b * t - c) / a, 0.0, 1.0)
    close_p = p0 + s[:, None] * d1
    close_q = q0 + t[:, None] * d2
    return np.linalg.norm(close_p - close_q, axis=1)


def _nonadjacent_pairs(n: int) -> Tuple[np.ndarray, np.ndarray]:
    i, j = np.triu_indices(n, k=2)
    keep = ~((i == 0) & (j == n - 1))
    return i[keep], j[keep]


def min_nonadjacent_gap(vertices: np.ndarray) -> float:
    """Smallest distance between nonadjacent edges; the embeddedness margin."""
    v = np.asarray(vertices, dtype=float)
    n = len(v)
    if n < 4:
        # a triangle has no nonadjacent edge pairs
        return math.inf
    i, j = _nonadjacent_pairs(n)
    nxt = (np.arange(n) + 1) % n
    d = _segment_gap(v[i], v[nxt[i]], v[j], v[nxt[j]])
    return float(d.min())


def _vertex_cone_ok(P: Polygon3, vert: np.ndarray, w: np.ndarray, tol: float) -> np.ndarray:
    """Normal-cone test at vertices `vert` for chord directions `w`.

    w points from the vertex toward the far chord endpoint.  The vertex
    normal cone is the fan of directions perpendicular to some convex
    combination of the incident edge directions, i.e. the first variation
    of arclength distance changes sign (or vanishes) across the vertex.
    """
    e = P.edges()
    ln = np.linalg.norm(e, axis=1)
    d = e / ln[:, None]
    gn = np.einsum("ij,ij->i", d[vert], w)
    gp = np.einsum("ij,ij->i", d[(vert - 1) % P.n], w)
    return ((gn <= tol) & (gp >= -tol)) | ((gn >= -tol) & (gp <= tol))


def dcsd_poly(P: Polygon3, return_chord: bool = True):
    """Doubly-critical self-distance over nonadjacent edge pairs.

    A chord is doubly critical when each endpoint sees the chord direction
    in the polygon's normal cone at that endpoint: perpendicularity on edge
    interiors, the min-type cone at vertices.  Candidates: interior-interior
    (common perpendicular, including the parallel-edge family),
    interior-vertex, and vertex-vertex.
    """
    v = P.vertices
    n = P.n
    if n < 4:
        raise NoCriticalChord("a triangle has no nonadjacent edge pairs")
    cone_tol = 1e-9 * P.diameter
    I, J = _nonadjacent_pairs(n)
    nxt = (np.arange(n) + 1) % n
    a0, a1 = v[I], v[nxt[I]]
    b0, b1 = v[J], v[nxt[J]]
    dA = a1 - a0
    dB = b1 - b0
    r = b0 - a0
    aa = np.einsum("ij,ij->i", dA, dA)
    ee = np.einsum("ij,ij->i", dB, dB)
    bb = np.einsum("ij,ij->i", dA, dB)
    det = aa * ee - bb * bb

    best = math.inf
    best_chord: Optional[Chord] = None

    def consider(dist, ends_i, si, ends_j, tj):
        nonlocal best, best_chord
        if len(dist) == 0:
            return
        k = int(np.argmin(dist))
        if dist[k] < best:
            best = float(dist[k])
            best_chord = ((int(ends_i[k]), float(si[k])),
                          (int(ends_j[k]), float(tj[k])))

    # interior-interior, non-parallel: unique common perpendicular
    nonpar = det > 1e-12 * aa * ee
    if nonpar.any():
        rA = np.einsum("ij,ij->i", dA, r)
        rB = np.einsum("ij,ij->i", dB, r)
        dd = np.where(nonpar, det, 1.0)
        s = (rA * ee - rB * bb) / dd
        t = (rA * bb - rB * aa) / dd
        ok = nonpar & (s >= 0.0) & (s <= 1.0) & (t >= 0.0) & (t <= 1.0)
        if ok.any():
            p = a0[ok] + s[ok, None] * dA[ok]
            q = b0[ok] + t[ok, None] * dB[ok]
            consider(np.linalg.norm(q - p, axis=1), I[ok], s[ok], J[ok], t[ok])

    # interior-interior, parallel: a family of common perpendiculars exists
    # whenever the perpendicular-foot ranges overlap
    par = ~nonpar
    if par.any():
        rA = np.einsum("ij,ij->i", dA, r)
        # feet on A of B's endpoints
        s0 = rA / aa
        s1 = (rA + bb) / aa
        lo = np.maximum(np.minimum(s0, s1), 0.0)
        hi = np.minimum(np.maximum(s0, s1), 1.0)
        ok = par & (lo <= hi)
        if ok.any():
            smid = 0.5 * (lo[ok] + hi[ok])
            p = a0[ok] + smid[:, None] * dA[ok]
            # foot of p on B
            tb = np.einsum("ij,ij->i", dB[ok], p - b0[ok]) / ee[ok]
            tb = np.clip(tb, 0.0, 1.0)
            q = b0[ok] + tb[:, None] * dB[ok]
            consider(np.linalg.norm(q - p, axis=1), I[ok], smid, J[ok], tb)

    # interior-vertex: perpendicular foot on one edge, cone at the vertex
    for edge_idx, other_idx, e0, de, sq in ((I, J, a0, dA, aa), (J, I, b0, dB, ee)):
        for side in (0, 1):
            vert = other_idx if side == 0 else nxt[other_idx]
            q = v[vert]
            s = np.einsum("ij,ij->i", de, q - e0) / sq
            ok = (s >= 0.0) & (s <= 1.0)
            if not ok.any():
                continue
            p = e0[ok] + s[ok, None] * de[ok]
            w = p - q[ok]
            ok2 = _vertex_cone_ok(P, vert[ok], w, cone_tol)
            if not ok2.any():
                continue
            consider(np.linalg.norm(w[ok2], axis=1),
                     edge_idx[ok][ok2], s[ok][ok2],
                     other_idx[ok][ok2], np.full(int(ok2.sum()), float(side)))

    # vertex-vertex: both cones
    for side_a in (0, 1):
        for side_b in (0, 1):
            va = I if side_a == 0 else nxt[I]
            vb = J if side_b == 0 else nxt[J]
            w = v[vb] - v[va]
            ok = _vertex_cone_ok(P, va, w, cone_tol) & _vertex_cone_ok(P, vb, -w, cone_tol)
            if not ok.any():
                continue
            consider(np.linalg.norm(w[ok], axis=1),
                     I[ok], np.full(int(ok.sum()), float(side_a)),
                     J[ok], np.full(int(ok.sum()), float(side_b)))

    if not math.isfinite(best):
        raise NoCriticalChord("no doubly-critical chord candidate found")
    if return_chord:
        return best, best_chord
    return best


def thickness(P: Polygon3) -> ThicknessReport:
    mr, kv = min_rad(P, return_argmin=True)
    if P.n == 3:
        # a triangle has no nonadjacent edge pairs; dcsd is vacuously +inf
        return ThicknessReport(mr, math.inf, mr, kv, None)
    dc, chord = dcsd_poly(P)
    if mr <= dc / 2.0:
        return ThicknessReport(mr, dc, mr, kv, chord)
    return ThicknessReport(mr, dc, dc / 2.0, kv, chord)


def ropelength(P: Polygon3) -> float:
    return total_length(P) / thickness(P).thickness


def normalize_to_unit_thickness(P: Polygon3) -> Polygon3:
    """Rescale so thickness is 1; length of the result is the ropelength."""
    th = thickness(P).thickness
    if not (th > 0.0):
        raise InvalidPolygon("thickness must be positive to normalize")
    return P.scaled(1.0 / th)
