import json
import math

import numpy as np
import pytest

from thickknot.errors import InvalidPolygon, NoCriticalChord
from thickknot.polygon import (
    Polygon3,
    dcsd_poly,
    min_nonadjacent_gap,
    min_rad,
    normalize_to_unit_thickness,
    ropelength,
    thickness,
    total_length,
)

from conftest import random_embedded_polygon, random_rotation, regular_polygon


# ---------------------------------------------------------------------------
# brute-force dcsd oracle: coordinate-wise local minima of the chord-length
# function on the arclength torus, plus perpendicular-perpendicular zero
# crossings, refined by nested grid search.  Independent of the candidate
# generator in thickknot.polygon.
# ---------------------------------------------------------------------------

def _arc_points(P, sigmas):
    v = P.vertices
    n = P.n
    lengths = P.edge_lengths()
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    total = cum[-1]
    s = np.mod(sigmas, total)
    idx = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, n - 1)
    frac = (s - cum[idx]) / lengths[idx]
    nxt = (idx + 1) % n
    return v[idx] + frac[:, None] * (v[nxt] - v[idx]), idx


def _pair_dist(P, s1, s2):
    p1, _ = _arc_points(P, np.atleast_1d(s1))
    p2, _ = _arc_points(P, np.atleast_1d(s2))
    return np.linalg.norm(p1 - p2, axis=1)


def _polygon_sigma_of_vertex(P, k):
    cum = np.concatenate([[0.0], np.cumsum(P.edge_lengths())])
    return float(cum[k])


def _straddles_at(P, sigma, q, h):
    """One-sided first variation of |x(sigma) - q| changes sign at sigma."""
    d0 = float(np.linalg.norm(_arc_points(P, np.atleast_1d(sigma))[0][0] - q))
    dp = float(np.linalg.norm(_arc_points(P, np.atleast_1d(sigma + h))[0][0] - q))
    dm = float(np.linalg.norm(_arc_points(P, np.atleast_1d(sigma - h))[0][0] - q))
    sp = (dp - d0) / h
    sm = (d0 - dm) / h
    return sp * sm <= 1e-9


def dcsd_brute(P, m=1400, refine_rounds=5):
    """Grid/numerical search for first-variation-critical chords.

    A chord is doubly critical when the one-sided arclength derivative of
    its length changes sign (or vanishes) at each endpoint.  Three searches
    mirror the candidate geometry without sharing any algebra with the
    implementation: torus-grid cell sign changes refined by per-axis
    bracketing (interior-interior), convex ternary search for perpendicular
    feet from vertices (interior-vertex), and direct straddle tests on
    vertex pairs (vertex-vertex).
    """
    n = P.n
    total = float(P.edge_lengths().sum())
    sig = np.arange(m) * total / m
    pts, edge_of = _arc_points(P, sig)
    Draw = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    ei = edge_of[:, None]
    ej = edge_of[None, :]
    adj = (ei == ej) | ((ei + 1) % n == ej) | ((ej + 1) % n == ei)
    D = np.where(adj, np.inf, Draw)

    # first-variation sign changes are detected on the raw distance
    # function; the adjacency exclusion only restricts reportable pairs
    crit = np.isfinite(D)
    for axis in (0, 1):
        fwd = np.roll(Draw, -1, axis=axis) - Draw
        bwd = Draw - np.roll(Draw, 1, axis=axis)
        crit &= (fwd * bwd) <= 0.0
    cells = np.argwhere(crit)
    if len(cells) == 0:
        return np.inf
    step0 = total / m
    vals = D[crit]
    # refinement moves each coordinate at most ~2*step0 and distance is
    # 1-Lipschitz per coordinate, so only near-minimal cells can win
    keep = vals <= vals.min() + 4.0 * step0
    cells = cells[keep]

    def refine_axis(s1, s2, axis, step):
        center = s1 if axis == 0 else s2
        grid = center + np.linspace(-step, step, 25)
        h = step / 100.0
        if axis == 0:
            g = _pair_dist(P, grid + h, np.full(25, s2)) - _pair_dist(P, grid - h, np.full(25, s2))
        else:
            g = _pair_dist(P, np.full(25, s1), grid + h) - _pair_dist(P, np.full(25, s1), grid - h)
        sw = np.nonzero(g[:-1] * g[1:] <= 0.0)[0]
        if len(sw) == 0:
            return center, step
        k = sw[np.argmin(np.abs(grid[sw] - center))]
        return 0.5 * (grid[k] + grid[k + 1]), (grid[k + 1] - grid[k])

    lengths = P.edge_lengths()
    cum = np.concatenate([[0.0], np.cumsum(lengths)])

    def edge_memberships(s):
        # a point within eps of a vertex lies on both closed incident edges
        s = float(np.mod(s, total))
        e = int(np.clip(np.searchsorted(cum, s, side="right") - 1, 0, n - 1))
        frac = (s - cum[e]) / lengths[e]
        eps = 1e-7
        if frac < eps:
            return {e, (e - 1) % n}
        if frac > 1.0 - eps:
            return {e, (e + 1) % n}
        return {e}

    def pair_ok(s1, s2):
        for a in edge_memberships(s1):
            for b in edge_memberships(s2):
                if a != b and (a + 1) % n != b and (b + 1) % n != a:
                    return True
        return False

    best = np.inf
    for (i, j) in cells:
        s1, s2 = sig[i], sig[j]
        w1 = w2 = step0
        for _ in range(refine_rounds):
            s1, w1 = refine_axis(s1, s2, 0, max(w1, 1e-12))
            s2, w2 = refine_axis(s1, s2, 1, max(w2, 1e-12))
        if pair_ok(s1, s2):
            best = min(best, float(_pair_dist(P, s1, s2)[0]))

    v = P.vertices
    h = 1e-7 * float(lengths.min())

    def vertex_pair_legal(kv, e):
        # chord between vertex kv and a point on edge e is reportable when
        # some incident edge of kv forms a nonadjacent pair with e
        for a in (kv, (kv - 1) % n):
            if a != e and (a + 1) % n != e and (e + 1) % n != a:
                return True
        return False

    # interior-vertex: distance from a fixed vertex to a segment is convex,
    # so ternary search finds the foot; then test the straddle at the vertex
    pairs = [(kv, e) for kv in range(n) for e in range(n) if vertex_pair_legal(kv, e)]
    if pairs:
        KV = np.array([p[0] for p in pairs])
        E = np.array([p[1] for p in pairs])
        q = v[KV]
        a = v[E]
        d_e = v[(E + 1) % n] - a
        lo = np.zeros(len(pairs))
        hi = np.ones(len(pairs))
        for _ in range(90):
            m1 = lo + (hi - lo) / 3.0
            m2 = hi - (hi - lo) / 3.0
            f1 = np.linalg.norm(a + m1[:, None] * d_e - q, axis=1)
            f2 = np.linalg.norm(a + m2[:, None] * d_e - q, axis=1)
            take = f1 <= f2
            hi = np.where(take, m2, hi)
            lo = np.where(~take, m1, lo)
        s = 0.5 * (lo + hi)
        interior = (s > 1e-6) & (s < 1.0 - 1e-6)
        for idx in np.nonzero(interior)[0]:
            p = a[idx] + s[idx] * d_e[idx]
            sv = _polygon_sigma_of_vertex(P, int(KV[idx]))
            if _straddles_at(P, sv, p, h):
                best = min(best, float(np.linalg.norm(p - q[idx])))

    # vertex-vertex: straddle at both ends
    for ku in range(n):
        su = _polygon_sigma_of_vertex(P, ku)
        for kv in range(ku + 1, n):
            legal = False
            for a in (ku, (ku - 1) % n):
                for b in (kv, (kv - 1) % n):
                    if a != b and (a + 1) % n != b and (b + 1) % n != a:
                        legal = True
            if not legal:
                continue
            sv2 = _polygon_sigma_of_vertex(P, kv)
            if _straddles_at(P, su, v[kv], h) and _straddles_at(P, sv2, v[ku], h):
                best = min(best, float(np.linalg.norm(v[kv] - v[ku])))
    return best


# ---------------------------------------------------------------------------
# closed forms for regular polygons
# ---------------------------------------------------------------------------


def test_total_length_square():
    P = regular_polygon(4)
    assert total_length(P) == pytest.approx(4.0 * math.sqrt(2.0), rel=1e-12)


def test_total_length_octagon():
    P = regular_polygon(8)
    assert total_length(P) == pytest.approx(16.0 * math.sin(math.pi / 8.0), rel=1e-12)


def test_degenerate_polygon_rejected():
    with pytest.raises(InvalidPolygon):
        Polygon3([[0, 0, 0], [1, 0, 0], [1, 0, 0]])


def test_min_rad_regular():
    for n in (4, 8):
        P = regular_polygon(n)
        assert min_rad(P) == pytest.approx(math.cos(math.pi / n), rel=1e-12)


def test_min_rad_collinear_vertex_skipped():
    # square with one edge subdivided: the midpoint is straight, skipped
    v = [[1, 1, 0], [-1, 1, 0], [-1, -1, 0], [0, -1, 0], [1, -1, 0]]
    P = Polygon3(v)
    # remaining corners are right angles with adjacent edge min length 1
    assert min_rad(P) == pytest.approx(1.0 / (2.0 * math.tan(math.pi / 4.0)), rel=1e-12)


def test_dcsd_octagon():
    P = regular_polygon(8)
    d, chord = dcsd_poly(P)
    assert d == pytest.approx(2.0 * math.cos(math.pi / 8.0), rel=1e-9)
    assert d == pytest.approx(dcsd_brute(P), abs=1e-6)


def test_dcsd_square():
    P = regular_polygon(4)
    d, _ = dcsd_poly(P)
    assert d == pytest.approx(math.sqrt(2.0), rel=1e-9)
    assert d == pytest.approx(dcsd_brute(P), abs=1e-6)


def test_dcsd_two_stacked_loops():
    # two congruent circular arcs stacked at vertical separation `sep`,
    # joined by short vertical strands; the doubly-critical chords are the
    # vertical chords between stacked arc edges, length exactly `sep`
    sep = 1.2
    m = 20
    th = np.radians(np.linspace(40.0, 320.0, m))
    lower = np.stack([2.0 * np.cos(th), 2.0 * np.sin(th), np.zeros(m)], axis=1)
    upper = np.stack([2.0 * np.cos(th[::-1]), 2.0 * np.sin(th[::-1]), np.full(m, sep)], axis=1)
    P = Polygon3(np.concatenate([lower, upper]))
    d, _ = dcsd_poly(P)
    assert d == pytest.approx(sep, abs=1e-9)
    assert d == pytest.approx(dcsd_brute(P), abs=1e-6)


def test_dcsd_random_matches_brute_force(rng):
    for k in range(6):
        P = random_embedded_polygon(rng, int(rng.integers(8, 25)))
        d, _ = dcsd_poly(P)
        assert d == pytest.approx(dcsd_brute(P), abs=1e-6), f"instance {k}"


def test_thickness_and_ropelength_regular():
    for n in (3, 4, 8, 16, 64):
        P = regular_polygon(n, radius=1.0)
        rep = thickness(P)
        assert rep.thickness == pytest.approx(min(rep.min_rad, rep.dcsd / 2.0), rel=0)
        assert ropelength(P) == pytest.approx(2.0 * n * math.tan(math.pi / n), rel=1e-9)


def test_ropelength_invariance(rng):
    for _ in range(10):
        P = random_embedded_polygon(rng, 16)
        r0 = ropelength(P)
        R = random_rotation(rng)
        s = float(rng.uniform(0.1, 10.0))
        Q = Polygon3(P.vertices @ R.T * s + rng.normal(size=3))
        assert ropelength(Q) == pytest.approx(r0, rel=1e-10)


def test_normalize_unit_thickness():
    P = regular_polygon(8)
    Q = normalize_to_unit_thickness(P)
    assert thickness(Q).thickness == pytest.approx(1.0, rel=1e-12)
    assert total_length(Q) == pytest.approx(ropelength(P), rel=1e-12)
    # idempotence
    Q2 = normalize_to_unit_thickness(Q)
    assert np.allclose(Q2.vertices, Q.vertices, rtol=1e-12, atol=0)


def test_normalize_identity_when_unit(rng):
    P = normalize_to_unit_thickness(random_embedded_polygon(rng, 12))
    Q = normalize_to_unit_thickness(P)
    assert np.max(np.abs(Q.vertices - P.vertices)) <= 1e-12 * P.diameter


def test_json_roundtrip_exact(rng):
    P = random_embedded_polygon(rng, 10)
    text = P.to_json()
    Q = Polygon3.from_json(text)
    assert Q.vertices.tobytes() == P.vertices.tobytes()
    assert json.loads(text)["vertices"] == P.vertices.tolist()


def test_min_nonadjacent_gap_triangle_is_inf():
    P = Polygon3([[0, 0, 0], [1, 0, 0], [0, 1, 0]])
    assert min_nonadjacent_gap(P.vertices) == math.inf
    with pytest.raises(NoCriticalChord):
        dcsd_poly(P)
