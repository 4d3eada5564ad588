"""Orthogonal projection of polygons and extraction of PD-coded diagrams.

A projection direction u gives the plane u-perp with a right-handed
orthonormal frame (e1, e2, u); the viewer looks along -u, so larger depth
along u means the strand passes over, and counterclockwise in the frame
is the sphere orientation used by the PD convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .diagram import Diagram
from .errors import InvalidDiagram, NotRegular
from .polygon import Polygon3


@dataclass(frozen=True)
class Direction:
    u: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float).reshape(3)
        norm = np.linalg.norm(u)
        if not np.isfinite(norm) or norm == 0.0:
            raise ValueError("direction must be a nonzero 3-vector")
        u = u / norm
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    def frame(self) -> Tuple[np.ndarray, np.ndarray]:
        """Deterministic right-handed orthonormal frame (e1, e2) of u-perp."""
        u = self.u
        axis = np.zeros(3)
        axis[int(np.argmin(np.abs(u)))] = 1.0
        e1 = axis - np.dot(axis, u) * u
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(u, e1)
        return e1, e2


@dataclass(frozen=True)
class RegularityThresholds:
    angle: float = 1e-4          # radians between crossing strands
    vertex_rel: float = 1e-6     # crossing-to-vertex clearance, relative to diameter
    triple_rel: float = 1e-6     # crossing-to-crossing clearance, relative
    depth_rel: float = 1e-9      # over/under depth gap, relative


@dataclass(frozen=True)
class RegularityReport:
    regular: bool
    crossings: int
    min_transversality_angle: float
    min_vertex_clearance: float
    min_triple_clearance: float
    min_depth_gap: float
    failure: Optional[str]       # None | Tangency | VertexHit | TriplePoint | DepthTie | Overlap


@dataclass(frozen=True)
class _Crossing:
    edge_i: int
    s: float          # parameter on edge_i
    edge_j: int
    t: float
    point: np.ndarray
    depth_i: float
    depth_j: float
    angle: float


def project(P: Polygon3, u: Direction, frame=None) -> Tuple[np.ndarray, np.ndarray]:
    """Planar coordinates in a frame of u-perp plus per-vertex depth along u."""
    if frame is None:
        e1, e2 = u.frame()
    else:
        e1, e2 = frame
    v = P.vertices
    coords = np.stack([v @ e1, v @ e2], axis=1)
    depths = v @ u.u
    return coords, depths


def _find_crossings(coords: np.ndarray, depths: np.ndarray) -> Tuple[List[_Crossing], bool]:
    """All transverse intersections between nonadjacent projected edges.

    Returns (crossings, overlap_flag); overlap_flag marks collinear
    overlapping edges, for which no crossing list is meaningful.
    """
    n = len(coords)
    nxt = (np.arange(n) + 1) % n
    crossings: List[_Crossing] = []
    overlap = False
    for i in range(n):
        a0, a1 = coords[i], coords[nxt[i]]
        da = a1 - a0
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            b0, b1 = coords[j], coords[nxt[j]]
            db = b1 - b0
            denom = da[0] * db[1] - da[1] * db[0]
            r = b0 - a0
            if denom == 0.0:
                # parallel: overlapping only if also collinear and ranges meet
                if abs(r[0] * da[1] - r[1] * da[0]) < 1e-14 * (np.linalg.norm(da) ** 2 + 1e-300):
                    ta = np.dot(r, da) / np.dot(da, da)
                    tb = ta + np.dot(db, da) / np.dot(da, da)
                    if min(ta, tb) <= 1.0 and max(ta, tb) >= 0.0:
                        overlap = True
                continue
            s = (r[0] * db[1] - r[1] * db[0]) / denom
            t = (r[0] * da[1] - r[1] * da[0]) / denom
            if 0.0 <= s <= 1.0 and 0.0 <= t <= 1.0:
                pt = a0 + s * da
                zi = depths[i] + s * (depths[nxt[i]] - depths[i])
                zj = depths[j] + t * (depths[nxt[j]] - depths[j])
                na, nb = np.linalg.norm(da), np.linalg.norm(db)
                cosang = abs(np.dot(da, db)) / (na * nb)
                angle = math.acos(min(1.0, cosang))
                crossings.append(_Crossing(i, float(s), j, float(t), pt, float(zi), float(zj), angle))
    return crossings, overlap


def check_regularity(P: Polygon3, u: Direction,
                     thresholds: RegularityThresholds = RegularityThresholds(),
                     frame=None) -> RegularityReport:
    """Certify that the projected polygon is a regular knot diagram.

    All pairwise crossings must be transverse with a margin, away from
    projected vertices and from each other, and with a depth gap; failures
    are reported as data, not raised.
    """
    coords, depths = project(P, u, frame)
    diam = P.diameter
    tau_vertex = thresholds.vertex_rel * diam
    tau_triple = thresholds.triple_rel * diam
    tau_depth = thresholds.depth_rel * diam

    crossings, overlap = _find_crossings(coords, depths)

    def report(failure, angle=math.inf, vclear=math.inf, tclear=math.inf, dgap=math.inf):
        return RegularityReport(failure is None, len(crossings), angle, vclear, tclear, dgap, failure)

    if overlap:
        return report("Overlap", angle=0.0)

    # degenerate projected edges behave like overlaps
    edge2d = np.linalg.norm(np.roll(coords, -1, axis=0) - coords, axis=1)
    if edge2d.min() < tau_vertex:
        return report("Overlap", angle=0.0)

    min_angle = min((c.angle for c in crossings), default=math.inf)
    min_vertex = math.inf
    for c in crossings:
        d = np.linalg.norm(coords - c.point[None, :], axis=1)
        min_vertex = min(min_vertex, float(d.min()))
    min_triple = math.inf
    for a in range(len(crossings)):
        for b in range(a + 1, len(crossings)):
            min_triple = min(min_triple, float(
                np.linalg.norm(crossings[a].point - crossings[b].point)))
    min_depth = min((abs(c.depth_i - c.depth_j) for c in crossings), default=math.inf)

    failure = None
    if min_angle < thresholds.angle:
        failure = "Tangency"
    elif min_vertex < tau_vertex:
        failure = "VertexHit"
    elif min_triple < tau_triple:
        failure = "TriplePoint"
    elif min_depth < tau_depth:
        failure = "DepthTie"
    return report(failure, min_angle, min_vertex, min_triple, min_depth)


def extract_diagram(P: Polygon3, u: Direction,
                    thresholds: RegularityThresholds = RegularityThresholds(),
                    frame=None) -> Diagram:
    """PD-coded diagram of a regular projection.

    Passages are ordered along the traversal; over/under comes from depth
    along u, and the counterclockwise tuple order starts from the incoming
    under-strand, read in the right-handed frame.
    """
    rep = check_regularity(P, u, thresholds, frame)
    if not rep.regular:
        raise NotRegular(rep)
    coords, depths = project(P, u, frame)
    crossings, _ = _find_crossings(coords, depths)
    if not crossings:
        return Diagram(())

    # passages sorted along the curve: (edge + parameter) is the curve position
    passages = []  # (position, crossing index, this-strand edge, other-strand edge, is_over)
    for k, c in enumerate(crossings):
        over_i = c.depth_i > c.depth_j
        passages.append((c.edge_i + c.s, k, c.edge_i, c.s, over_i))
        passages.append((c.edge_j + c.t, k, c.edge_j, c.t, not over_i))
    passages.sort(key=lambda rec: rec[0])
    two_n = len(passages)
    pass_no = {}
    for num, rec in enumerate(passages, start=1):
        pass_no[(rec[1], rec[4])] = num

    n = len(crossings)
    nxt = (np.arange(len(coords)) + 1) % len(coords)
    pd_rows = []
    for k, c in enumerate(crossings):
        over_i = c.depth_i > c.depth_j
        if over_i:
            t_over = coords[nxt[c.edge_i]] - coords[c.edge_i]
            t_under = coords[nxt[c.edge_j]] - coords[c.edge_j]
        else:
            t_over = coords[nxt[c.edge_j]] - coords[c.edge_j]
            t_under = coords[nxt[c.edge_i]] - coords[c.edge_i]
        j_u = pass_no[(k, False)]
        j_o = pass_no[(k, True)]
        a = j_u
        c_arc = j_u % two_n + 1
        oin = j_o
        oout = j_o % two_n + 1
        sign = 1 if (t_over[0] * t_under[1] - t_over[1] * t_under[0]) > 0 else -1
        if sign > 0:
            b, d = oout, oin
        else:
            b, d = oin, oout
        pd_rows.append((a, b, c_arc, d))

    try:
        return Diagram(pd_rows)
    except InvalidDiagram as exc:  # pragma: no cover - guards extraction bugs
        raise InvalidDiagram(f"extracted PD inconsistent: {exc}") from exc
