"""Combinatorial Reidemeister moves, neighbor enumeration, rooted typed balls.

Moves are splice operations on the passage sequence of a diagram: the
knot traversal as a cyclic list of (crossing, over/under) passages plus a
sign per crossing.  Arc g occupies the gap between passages g-1 and g, so
curls are adjacent same-crossing passage pairs, strand pushes insert two
passages into each of two arcs, and the triangle slide swaps the flanking
passages of the three sides.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .diagram import Dart, Diagram
from .errors import BudgetExceeded, InvalidSite

KINDS = ("R1+", "R1-", "R2+", "R2-", "R3")


def base_kind(kind: str) -> str:
    """Coarse move class R1 | R2 | R3 (drops the +/- direction)."""
    return kind[:2]


@dataclass(frozen=True, order=True)
class TypedMove:
    kind: str
    site: tuple


def _pairs_of(plist) -> Dict[int, List[int]]:
    pos: Dict[int, List[int]] = {}
    for idx, (cid, _) in enumerate(plist):
        pos.setdefault(cid, []).append(idx)
    return pos


def _rebuild(plist, signs) -> Diagram:
    """Renumber crossings by first passage and rebuild the diagram."""
    order: Dict[object, int] = {}
    for cid, _ in plist:
        if cid not in order:
            order[cid] = len(order)
    new_plist = [(order[cid], role) for cid, role in plist]
    new_signs = [0] * len(order)
    for cid, k in order.items():
        new_signs[k] = signs[cid]
    return Diagram.from_passage_form(new_plist, new_signs)


def _arc_gap_index(arc: int, two_n: int) -> int:
    """List index at which to insert new passages inside arc `arc`."""
    return (arc - 1) % two_n if two_n else 0


def _flanking_indices(arc: int, two_n: int) -> Tuple[int, int]:
    """Indices of the passages at the start and end of arc `arc`."""
    return (arc - 2) % two_n, (arc - 1) % two_n


def _signs_dict(D: Diagram) -> Dict[int, int]:
    return {i: D.sign(i) for i in range(D.n_crossings)}


# -- applicability analysis ---------------------------------------------------


def _monogon_crossings(D: Diagram) -> List[int]:
    """Crossings whose two passages are adjacent along the knot (curls)."""
    plist, _ = D.passage_form()
    two_n = len(plist)
    out = []
    for i in range(D.n_crossings):
        idx = [k for k, (cid, _) in enumerate(plist) if cid == i]
        if (idx[0] + 1) % two_n == idx[1] or (idx[1] + 1) % two_n == idx[0]:
            out.append(i)
    return out


def _bigon_sites(D: Diagram) -> List[Tuple[int, int]]:
    """Removable bigons: a face of degree two whose corners are distinct
    crossings and whose sides are one full strand over the other."""
    sites = []
    for face in D.faces():
        if len(face) != 2:
            continue
        d1, d2 = face
        e1, e2 = D.dart_arc(d1), D.dart_arc(d2)
        if e1 == e2:
            continue
        occ = D.arc_darts()
        c1 = {dart[0] for dart in occ[e1]}
        c2 = {dart[0] for dart in occ[e2]}
        corners = c1 & c2
        if len(c1) != 2 or c1 != c2 or len(corners) != 2:
            continue
        over1 = [dart[1] in (1, 3) for dart in occ[e1]]
        over2 = [dart[1] in (1, 3) for dart in occ[e2]]
        if all(over1) and not any(over2) or all(over2) and not any(over1):
            sites.append(tuple(sorted(corners)))
    out = sorted(set(sites))
    return out


def _trigon_sites(D: Diagram) -> List[Tuple[Dart, Dart, Dart]]:
    """Slideable trigons: three distinct sides and corners, with the
    over/under pattern a total order (one strand over both others)."""
    occ = D.arc_darts()
    sites = []
    for face in D.faces():
        if len(face) != 3:
            continue
        arcs = [D.dart_arc(d) for d in face]
        if len(set(arcs)) != 3:
            continue
        corners = [face[(k + 1) % 3][0] for k in range(3)]
        if len(set(corners)) != 3:
            continue
        # at the corner between consecutive sides a, b the darts are
        # theta(a) and b; count how often each side passes over
        over_count = {arc: 0 for arc in arcs}
        ok = True
        for k in range(3):
            a = face[k]
            b = face[(k + 1) % 3]
            d1, d2 = occ[D.dart_arc(a)]
            far = d2 if a == d1 else d1
            if far[0] != b[0]:
                ok = False
                break
            if far[1] in (1, 3):
                over_count[D.dart_arc(a)] += 1
            if b[1] in (1, 3):
                over_count[D.dart_arc(b)] += 1
        if not ok:
            continue
        if sorted(over_count.values()) == [0, 1, 2]:
            sites.append(tuple(sorted(face)))
    return sorted(set(sites))


def _face_of_darts(D: Diagram, darts: Iterable[Dart]) -> Optional[int]:
    want = set(darts)
    for k, face in enumerate(D.faces()):
        if want <= set(face):
            return k
    return None


# -- apply --------------------------------------------------------------------


def apply_move(D: Diagram, m: TypedMove) -> Diagram:
    """Apply a move at its site; raises InvalidSite for stale sites.

    Crossing-count deltas are +1, -1, +2, -2, 0 for R1+, R1-, R2+, R2-,
    R3 respectively; results are validated planar.
    """
    if m.kind not in KINDS:
        raise InvalidSite(f"unknown move kind {m.kind!r}")
    plist, signs_list = D.passage_form()
    signs: Dict[object, int] = dict(enumerate(signs_list))
    two_n = len(plist)
    n = D.n_crossings

    if m.kind == "R1+":
        arc, order, chi = m.site
        if arc not in D.arcs() or order not in ("ou", "uo") or chi not in (1, -1):
            raise InvalidSite(f"bad curl site {m.site}")
        roles = ("O", "U") if order == "ou" else ("U", "O")
        new = ("c", n)
        at = _arc_gap_index(arc, two_n)
        plist[at:at] = [(new, roles[0]), (new, roles[1])]
        signs[new] = chi
        return _rebuild(plist, signs)

    if m.kind == "R1-":
        (cid,) = m.site
        if cid not in _monogon_crossings(D):
            raise InvalidSite(f"crossing {cid} is not a curl")
        plist = [(c, r) for c, r in plist if c != cid]
        return _rebuild(plist, signs)

    if m.kind == "R2+":
        if D.n_crossings == 0:
            tag, over_first = m.site
            if tag != "empty":
                raise InvalidSite(f"bad push site {m.site}")
            x, y = ("O", "U") if over_first else ("U", "O")
            sp = -1 if over_first else 1
            plist = [("P", x), ("Q", x), ("Q", y), ("P", y)]
            return _rebuild(plist, {"P": sp, "Q": -sp})
        d1, d2 = (tuple(m.site[0]), tuple(m.site[1]))
        e1, e2 = _validate_push_site(D, d1, d2)
        r1 = d1[1] in D.outgoing_positions(d1[0])
        r2 = d2[1] in D.outgoing_positions(d2[0])
        sign_p = -1 if r2 else 1
        over = [("P", "O"), ("Q", "O")]
        under = [("Q", "U"), ("P", "U")] if r1 == r2 else [("P", "U"), ("Q", "U")]
        ins = sorted([(_arc_gap_index(e1, two_n), over),
                      (_arc_gap_index(e2, two_n), under)], reverse=True)
        for at, block in ins:
            plist[at:at] = block
        signs["P"] = sign_p
        signs["Q"] = -sign_p
        return _rebuild(plist, signs)

    if m.kind == "R2-":
        c1, c2 = m.site
        if tuple(sorted((c1, c2))) not in _bigon_sites(D):
            raise InvalidSite(f"crossings {m.site} do not bound a removable bigon")
        plist = [(c, r) for c, r in plist if c not in (c1, c2)]
        return _rebuild(plist, signs)

    # R3
    darts = tuple(tuple(d) for d in m.site)
    if tuple(sorted(darts)) not in _trigon_sites(D):
        raise InvalidSite(f"darts {m.site} do not bound a slideable trigon")
    for dart in darts:
        arc = D.dart_arc(dart)
        i, j = _flanking_indices(arc, two_n)
        plist[i], plist[j] = plist[j], plist[i]
    return _rebuild(plist, signs)


def _validate_push_site(D: Diagram, d1: Dart, d2: Dart) -> Tuple[int, int]:
    for dart in (d1, d2):
        if not (0 <= dart[0] < D.n_crossings and 0 <= dart[1] < 4):
            raise InvalidSite(f"dart {dart} out of range")
    if d1 == d2:
        raise InvalidSite("push sides must be distinct")
    e1, e2 = D.dart_arc(d1), D.dart_arc(d2)
    if e1 == e2:
        raise InvalidSite("push sides must lie on distinct arcs")
    if _face_of_darts(D, (d1, d2)) is None:
        raise InvalidSite("push sides must bound a common face")
    return e1, e2


# -- enumerate ----------------------------------------------------------------


def enumerate_moves(D: Diagram) -> List[Tuple[TypedMove, Diagram]]:
    """Complete list of single Reidemeister moves from D.

    Curls insert on every arc with both loop orders and both signs; curl
    and bigon removals come from monogon and coherent bigon faces; pushes
    take every ordered pair of distinct-arc sides of a common face; and
    slides act on every coherent trigon.  Results are deduplicated by
    (canonical key of the result, move kind) and sorted by (kind, site).
    """
    candidates: List[TypedMove] = []
    if D.n_crossings == 0:
        for order in ("ou", "uo"):
            for chi in (1, -1):
                candidates.append(TypedMove("R1+", (1, order, chi)))
        for over_first in (True, False):
            candidates.append(TypedMove("R2+", ("empty", over_first)))
    else:
        for arc in D.arcs():
            for order in ("ou", "uo"):
                for chi in (1, -1):
                    candidates.append(TypedMove("R1+", (arc, order, chi)))
        for cid in _monogon_crossings(D):
            candidates.append(TypedMove("R1-", (cid,)))
        for face in D.faces():
            if len(face) < 2:
                continue
            for d1 in face:
                for d2 in face:
                    if d1 == d2 or D.dart_arc(d1) == D.dart_arc(d2):
                        continue
                    candidates.append(TypedMove("R2+", (d1, d2)))
        for site in _bigon_sites(D):
            candidates.append(TypedMove("R2-", site))
        for site in _trigon_sites(D):
            candidates.append(TypedMove("R3", site))

    candidates.sort()
    out: List[Tuple[TypedMove, Diagram]] = []
    seen: Set[Tuple[str, str]] = set()
    for mv in candidates:
        result = apply_move(D, mv)
        tag = (mv.kind, result.canonical_key())
        if tag in seen:
            continue
        seen.add(tag)
        out.append((mv, result))
    return out


# -- rooted typed balls --------------------------------------------------------


@dataclass(frozen=True)
class RootedTypedBall:
    root: str
    radius: int
    vertices: Dict[str, int]               # canonical key -> crossing count
    edges: Tuple[Tuple[str, str, str], ...]  # (key, key, kind), deduplicated

    def to_json(self) -> str:
        keys = sorted(self.vertices, key=lambda k: (self.vertices[k], k))
        index = {k: i for i, k in enumerate(keys)}
        return json.dumps({
            "root": self.root,
            "radius": self.radius,
            "vertices": [{"key": k, "crossings": self.vertices[k]} for k in keys],
            "edges": sorted([index[a], index[b], kind] for a, b, kind in self.edges),
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RootedTypedBall":
        data = json.loads(text)
        keys = [row["key"] for row in data["vertices"]]
        vertices = {row["key"]: row["crossings"] for row in data["vertices"]}
        edges = tuple(sorted((keys[a], keys[b], kind) for a, b, kind in data["edges"]))
        return cls(data["root"], data["radius"], vertices, edges)


def _edge_record(key_a: str, n_a: int, key_b: str, n_b: int, kind: str):
    """Canonical undirected edge: creation direction for R1/R2, lexical for R3."""
    base = base_kind(kind)
    if base == "R3":
        lo, hi = sorted((key_a, key_b))
        return (lo, hi, "R3")
    if n_a <= n_b:
        return (key_a, key_b, base + "+")
    return (key_b, key_a, base + "+")


def ball(D: Diagram, radius: int, budget: int = 200_000) -> RootedTypedBall:
    """Breadth-first rooted typed ball in the Reidemeister graph.

    Vertices are canonical keys; parallel edges of different kinds are
    kept, duplicates of one kind collapse.  Raises BudgetExceeded when the
    vertex count passes `budget`.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    root = D.canonical()
    root_key = root.canonical_key()
    vertices: Dict[str, int] = {root_key: root.n_crossings}
    edges: Set[Tuple[str, str, str]] = set()
    frontier: Dict[str, Diagram] = {root_key: root}
    for _ in range(radius):
        nxt: Dict[str, Diagram] = {}
        for key in sorted(frontier):
            dia = frontier[key]
            for mv, result in enumerate_moves(dia):
                rkey = result.canonical_key()
                edges.add(_edge_record(key, dia.n_crossings, rkey, result.n_crossings, mv.kind))
                if rkey not in vertices:
                    vertices[rkey] = result.n_crossings
                    nxt[rkey] = result.canonical()
                    if len(vertices) > budget:
                        raise BudgetExceeded(
                            f"ball exceeded {budget} vertices at radius step")
        frontier = nxt
    edges = {e for e in edges if e[0] in vertices and e[1] in vertices}
    return RootedTypedBall(root_key, radius, vertices, tuple(sorted(edges)))
