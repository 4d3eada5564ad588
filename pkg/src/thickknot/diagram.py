"""Knot diagrams as planar combinatorial maps with crossing data.

A diagram with n crossings is stored as a PD code: for each crossing, the
four incident arc labels in counterclockwise order starting from the
incoming under-strand.  Arcs are labeled 1..2n along the knot traversal,
so each label appears exactly twice and position 2 of every crossing is
position 0 plus one (mod 2n).  The tuple order encodes the rotation
system, which determines the diagram on the oriented sphere; the face
count must satisfy Euler's formula, which is exactly planarity.

The crossingless diagram is the empty PD.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import InvalidDiagram

PDTuple = Tuple[int, int, int, int]
Dart = Tuple[int, int]  # (crossing index, tuple position 0..3)

EMPTY_KEY = "0:"


def _succ(x: int, two_n: int) -> int:
    return x % two_n + 1


class Diagram:
    """Single-component knot diagram on the sphere."""

    __slots__ = ("pd", "_key", "_faces", "_signs")

    def __init__(self, pd: Iterable[Sequence[int]], validate: bool = True):
        self.pd: Tuple[PDTuple, ...] = tuple(tuple(int(x) for x in row) for row in pd)
        self._key: Optional[str] = None
        self._faces: Optional[Tuple[Tuple[Dart, ...], ...]] = None
        self._signs: Optional[Tuple[int, ...]] = None
        if validate:
            self._validate()

    # -- structure ---------------------------------------------------------

    @property
    def n_crossings(self) -> int:
        return len(self.pd)

    def _validate(self):
        n = self.n_crossings
        if n == 0:
            return
        two_n = 2 * n
        counts = Counter(x for row in self.pd for x in row)
        if set(counts) != set(range(1, two_n + 1)) or any(c != 2 for c in counts.values()):
            raise InvalidDiagram("arc labels must be 1..2n, each appearing twice")
        under = set()
        over = set()
        for a, b, c, d in self.pd:
            if len({a, b, c, d}) < 2:
                raise InvalidDiagram("crossing with fewer than two distinct arcs")
            if c != _succ(a, two_n):
                raise InvalidDiagram(f"under-strand must exit on arc {a}+1, got {(a, b, c, d)}")
            under.add(a)
        for i in range(n):
            over.add(self.over_in(i))
        if under & over or (under | over) != set(range(1, two_n + 1)):
            raise InvalidDiagram("over/under passages do not tile the traversal")
        if len(self.faces()) != n + 2:
            raise InvalidDiagram("rotation system is not planar (Euler check failed)")

    def over_in(self, i: int) -> int:
        """Arc on which the over-strand enters crossing i."""
        a, b, c, d = self.pd[i]
        two_n = 2 * self.n_crossings
        if two_n == 2:
            return 2 if a == 1 else 1
        if d == _succ(b, two_n):
            return b
        if b == _succ(d, two_n):
            return d
        raise InvalidDiagram(f"over-strand arcs not consecutive in {(a, b, c, d)}")

    def sign(self, i: int) -> int:
        """Crossing sign: +1 when the counterclockwise-next arc after the
        incoming under-strand is the outgoing over-strand."""
        a, b, c, d = self.pd[i]
        two_n = 2 * self.n_crossings
        return 1 if b == _succ(self.over_in(i), two_n) else -1

    def signs(self) -> Tuple[int, ...]:
        if self._signs is None:
            self._signs = tuple(self.sign(i) for i in range(self.n_crossings))
        return self._signs

    def writhe(self) -> int:
        return sum(self.signs())

    def arcs(self) -> List[int]:
        """Arc labels; the crossingless diagram has the single closed arc 1."""
        n = self.n_crossings
        return list(range(1, 2 * n + 1)) if n else [1]

    def dart_arc(self, dart: Dart) -> int:
        return self.pd[dart[0]][dart[1]]

    def arc_darts(self) -> Dict[int, List[Dart]]:
        occ: Dict[int, List[Dart]] = defaultdict(list)
        for i, row in enumerate(self.pd):
            for p, arc in enumerate(row):
                occ[arc].append((i, p))
        return dict(occ)

    def outgoing_positions(self, i: int) -> Tuple[int, int]:
        """Tuple positions at crossing i where an arc leaves the crossing."""
        return (2, 1) if self.sign(i) > 0 else (2, 3)

    # -- faces -------------------------------------------------------------

    def faces(self) -> Tuple[Tuple[Dart, ...], ...]:
        """Faces of the sphere map as orbits of darts.

        The orbit step follows an arc to its far end and turns to the next
        dart counterclockwise; each dart lies in exactly one face, so face
        degrees sum to 4n.
        """
        if self._faces is not None:
            return self._faces
        n = self.n_crossings
        if n == 0:
            self._faces = ()
            return self._faces
        occ = self.arc_darts()

        def theta(dart: Dart) -> Dart:
            d1, d2 = occ[self.dart_arc(dart)]
            return d2 if dart == d1 else d1

        seen = set()
        faces = []
        for i in range(n):
            for p in range(4):
                start = (i, p)
                if start in seen:
                    continue
                cyc = []
                cur = start
                while cur not in seen:
                    seen.add(cur)
                    cyc.append(cur)
                    far = theta(cur)
                    cur = (far[0], (far[1] + 1) % 4)
                faces.append(tuple(cyc))
        self._faces = tuple(faces)
        return self._faces

    def corner_face_index(self, i: int, p: int) -> int:
        """Face containing the corner between darts p and p+1 of crossing i."""
        target = (i, (p + 1) % 4)
        for k, f in enumerate(self.faces()):
            if target in f:
                return k
        raise InvalidDiagram("corner not found in any face")

    # -- passage form (used by the move machinery) --------------------------

    def passage_form(self) -> Tuple[List[Tuple[int, str]], List[int]]:
        """Knot traversal as a list of passages plus per-crossing signs.

        Entry j-1 describes passage j: (crossing index, 'U' or 'O').
        """
        n = self.n_crossings
        plist: List[Optional[Tuple[int, str]]] = [None] * (2 * n)
        for i, (a, _, _, _) in enumerate(self.pd):
            plist[a - 1] = (i, "U")
            plist[self.over_in(i) - 1] = (i, "O")
        return [p for p in plist if p is not None], list(self.signs())

    @classmethod
    def from_passage_form(cls, plist: Sequence[Tuple[int, str]], signs: Sequence[int],
                          validate: bool = True) -> "Diagram":
        two_n = len(plist)
        n = two_n // 2
        if two_n != 2 * n:
            raise InvalidDiagram("odd passage count")
        under: Dict[int, int] = {}
        over: Dict[int, int] = {}
        for j, (cid, role) in enumerate(plist, start=1):
            (under if role == "U" else over)[cid] = j
        if set(under) != set(over) or len(under) != n:
            raise InvalidDiagram("each crossing needs one under and one over passage")
        pd = []
        for cid in sorted(under):
            a = under[cid]
            c = _succ(a, two_n)
            oin = over[cid]
            oout = _succ(oin, two_n)
            if signs[cid] > 0:
                b, d = oout, oin
            else:
                b, d = oin, oout
            pd.append((a, b, c, d))
        return cls(pd, validate=validate)

    # -- identity -----------------------------------------------------------

    def canonical_key(self) -> str:
        """Minimal PD serialization over all basepoints and both traversal
        directions; invariant under sphere isotopy, distinct for mirrors."""
        if self._key is not None:
            return self._key
        n = self.n_crossings
        if n == 0:
            self._key = EMPTY_KEY
            return self._key
        two_n = 2 * n
        best: Optional[Tuple[int, ...]] = None
        for direction in (1, -1):
            for start in range(1, two_n + 1):
                if direction == 1:
                    relabel = [0] + [((x - start) % two_n) + 1 for x in range(1, two_n + 1)]
                else:
                    relabel = [0] + [((start - x) % two_n) + 1 for x in range(1, two_n + 1)]
                rows = []
                for (a, b, c, d) in self.pd:
                    if direction == 1:
                        rows.append((relabel[a], relabel[b], relabel[c], relabel[d]))
                    else:
                        rows.append((relabel[c], relabel[d], relabel[a], relabel[b]))
                rows.sort()
                flat = tuple(x for row in rows for x in row)
                if best is None or flat < best:
                    best = flat
        key = f"{n}:" + ";".join(
            ",".join(str(x) for x in best[k:k + 4]) for k in range(0, 4 * n, 4))
        self._key = key
        return key

    @classmethod
    def from_key(cls, key: str) -> "Diagram":
        head, _, body = key.partition(":")
        n = int(head)
        if n == 0:
            return cls(())
        rows = [tuple(int(x) for x in part.split(",")) for part in body.split(";")]
        if len(rows) != n:
            raise InvalidDiagram("key crossing count mismatch")
        return cls(rows)

    def canonical(self) -> "Diagram":
        return Diagram.from_key(self.canonical_key())

    def mirror(self) -> "Diagram":
        """Swap over and under at every crossing (an involution)."""
        rows = []
        for i, (a, b, c, d) in enumerate(self.pd):
            if self.over_in(i) == b:
                rows.append((b, c, d, a))
            else:
                rows.append((d, a, b, c))
        return Diagram(rows)

    # -- invariants ----------------------------------------------------------

    def checkerboard(self) -> List[int]:
        """Two-color the faces so arc-adjacent faces differ; color of face 0
        is 0.  Exists because the map is four-valent and planar."""
        faces = self.faces()
        arc_faces: Dict[int, List[int]] = defaultdict(list)
        for k, f in enumerate(faces):
            for dart in f:
                arc_faces[self.dart_arc(dart)].append(k)
        neighbors: Dict[int, List[int]] = defaultdict(list)
        for ks in arc_faces.values():
            f1, f2 = ks
            neighbors[f1].append(f2)
            neighbors[f2].append(f1)
        color = [-1] * len(faces)
        color[0] = 0
        stack = [0]
        while stack:
            k = stack.pop()
            for other in neighbors[k]:
                if color[other] == -1:
                    color[other] = 1 - color[k]
                    stack.append(other)
                elif color[other] == color[k]:
                    raise InvalidDiagram("face adjacency not bipartite")
        if any(c == -1 for c in color):
            raise InvalidDiagram("diagram faces not connected")
        return color

    def determinant(self) -> int:
        """Knot determinant via the Goeritz matrix of a checkerboard coloring."""
        n = self.n_crossings
        if n == 0:
            return 1
        faces = self.faces()
        color = self.checkerboard()
        white = [k for k, c in enumerate(color) if c == 0]
        widx = {k: m for m, k in enumerate(white)}
        m = len(white)
        if m <= 1:
            return 1
        G = [[Fraction(0)] * m for _ in range(m)]
        for i in range(n):
            # corner between the incoming under-dart and the next dart
            # counterclockwise fixes the crossing type for this shading
            f0 = self.corner_face_index(i, 0)
            eta = 1 if color[f0] == 0 else -1
            fa = self.corner_face_index(i, 0)
            fb = self.corner_face_index(i, 2)
            if color[fa] != 0:
                fa = self.corner_face_index(i, 1)
                fb = self.corner_face_index(i, 3)
            ia, ib = widx[fa], widx[fb]
            if ia == ib:
                continue
            G[ia][ib] -= eta
            G[ib][ia] -= eta
            G[ia][ia] += eta
            G[ib][ib] += eta
        # principal minor: drop the last white face
        size = m - 1
        M = [row[:size] for row in G[:size]]
        return abs(_int_det(M))

    def face_count(self) -> int:
        return len(self.faces()) if self.n_crossings else 2

    def __repr__(self):
        return f"Diagram({list(self.pd)!r})"

    def __eq__(self, other):
        return isinstance(other, Diagram) and self.pd == other.pd

    def __hash__(self):
        return hash(self.pd)


def _int_det(M: List[List[Fraction]]) -> int:
    """Exact determinant by fraction-free-ish Gaussian elimination."""
    size = len(M)
    if size == 0:
        return 1
    det = Fraction(1)
    M = [row[:] for row in M]
    for col in range(size):
        piv = None
        for r in range(col, size):
            if M[r][col] != 0:
                piv = r
                break
        if piv is None:
            return 0
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            det = -det
        det *= M[col][col]
        inv = M[col][col]
        for r in range(col + 1, size):
            if M[r][col] == 0:
                continue
            factor = M[r][col] / inv
            for c in range(col, size):
                M[r][c] -= factor * M[col][c]
    assert det.denominator == 1
    return int(det)


# -- PD text format: lines "X a b c d", '#' comments -------------------------


def parse_pd_text(text: str) -> Diagram:
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0].upper() != "X" or len(parts) != 5:
            raise InvalidDiagram(f"line {lineno}: expected 'X a b c d'")
        rows.append(tuple(int(x) for x in parts[1:]))
    return Diagram(rows)


def format_pd_text(D: Diagram) -> str:
    return "\n".join("X " + " ".join(str(x) for x in row) for row in D.pd) + ("\n" if D.pd else "")


# -- standard diagrams --------------------------------------------------------

TREFOIL_PD = ((1, 4, 2, 5), (3, 6, 4, 1), (5, 2, 6, 3))
FIGURE_EIGHT_PD = ((4, 2, 5, 1), (8, 6, 1, 5), (6, 3, 7, 4), (2, 7, 3, 8))


def empty_diagram() -> Diagram:
    return Diagram(())


def trefoil_diagram() -> Diagram:
    return Diagram(TREFOIL_PD)


def figure_eight_diagram() -> Diagram:
    return Diagram(FIGURE_EIGHT_PD)
