"""Minutia recovery accounting and rank-k identification curves.

The bundled alignment-search matcher exists so that the identification
machinery runs end to end on synthetic galleries; its absolute scores are
not comparable to commercial matchers.
"""

from dataclasses import dataclass

import numpy as np

from .core import MinutiaSet


@dataclass(frozen=True)
class MatchTolerance:
    loc_radius: float = 15.0
    angle_tol: float = np.pi / 6.0
    require_type: bool = True

    def __post_init__(self):
        if self.loc_radius <= 0 or self.angle_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class RecoveryRow:
    recovered_genuine: int
    introduced_fake: int
    n_extracted: int
    n_genuine: int


def circular_diff(a, b):
    """Smallest absolute difference between angles defined modulo 2*pi."""
    d = np.mod(a - b, 2.0 * np.pi)
    return np.minimum(d, 2.0 * np.pi - d)


def _candidate_pairs(extracted, genuine, tol: MatchTolerance):
    pairs = []
    for i, e in enumerate(extracted):
        for j, g in enumerate(genuine):
            d = np.hypot(e.x - g.x, e.y - g.y)
            if d > tol.loc_radius:
                continue
            if circular_diff(e.angle, g.angle) > tol.angle_tol:
                continue
            if tol.require_type and e.kind != g.kind:
                continue
            pairs.append((d, i, j))
    return pairs


def match_minutiae(extracted: MinutiaSet, genuine: MinutiaSet,
                   tol: MatchTolerance = MatchTolerance()) -> RecoveryRow:
    """Greedy distance-sorted one-to-one pairing; every unmatched extracted
    minutia counts as an introduced fake."""
    pairs = sorted(_candidate_pairs(list(extracted), list(genuine), tol))
    used_e, used_g = set(), set()
    recovered = 0
    for _, i, j in pairs:
        if i in used_e or j in used_g:
            continue
        used_e.add(i)
        used_g.add(j)
        recovered += 1
    return RecoveryRow(recovered_genuine=recovered,
                       introduced_fake=len(extracted) - recovered,
                       n_extracted=len(extracted), n_genuine=len(genuine))


def match_minutiae_optimal(extracted: MinutiaSet, genuine: MinutiaSet,
                           tol: MatchTolerance = MatchTolerance()) -> RecoveryRow:
    """Maximum-cardinality assignment by exhaustive search; test oracle for
    small instances only."""
    pairs = _candidate_pairs(list(extracted), list(genuine), tol)
    by_e = {}
    for d, i, j in pairs:
        by_e.setdefault(i, []).append(j)
    e_ids = sorted(by_e)

    def best(idx, used_g):
        if idx == len(e_ids):
            return 0
        top = best(idx + 1, used_g)
        for j in by_e[e_ids[idx]]:
            if j not in used_g:
                top = max(top, 1 + best(idx + 1, used_g | {j}))
        return top

    recovered = best(0, frozenset())
    return RecoveryRow(recovered_genuine=recovered,
                       introduced_fake=len(extracted) - recovered,
                       n_extracted=len(extracted), n_genuine=len(genuine))


# ---------------------------------------------------------------------------
# alignment-search similarity and rank curves

def _as_arrays(mins: MinutiaSet):
    pts = np.array([[m.x, m.y] for m in mins], dtype=np.float64)
    ang = np.array([m.angle for m in mins], dtype=np.float64)
    return pts, ang


def similarity_score(probe: MinutiaSet, gallery_item: MinutiaSet,
                     loc_radius: float = 12.0, angle_tol: float = np.pi / 6.0,
                     rot_range_deg: float = 30.0, rot_step_deg: float = 2.0,
                     max_anchors: int = 12) -> float:
    """Best matched-pair count over a grid of rotations and anchor-implied
    translations, normalized by sqrt(|probe| * |gallery|)."""
    if len(probe) == 0 or len(gallery_item) == 0:
        return 0.0
    p_pts, p_ang = _as_arrays(probe)
    g_pts, g_ang = _as_arrays(gallery_item)
    na_p = min(len(probe), max_anchors)
    na_g = min(len(gallery_item), max_anchors)
    anchor_p = np.linspace(0, len(probe) - 1, na_p).astype(int)
    anchor_g = np.linspace(0, len(gallery_item) - 1, na_g).astype(int)
    best = 0
    for rot_deg in np.arange(-rot_range_deg, rot_range_deg + 1e-9, rot_step_deg):
        rot = np.deg2rad(rot_deg)
        c, s = np.cos(rot), np.sin(rot)
        rp = p_pts @ np.array([[c, -s], [s, c]]).T
        ra = np.mod(p_ang + rot, 2.0 * np.pi)
        ang_ok = circular_diff(ra[:, None], g_ang[None, :]) <= angle_tol
        for ia in anchor_p:
            for jb in anchor_g:
                t = g_pts[jb] - rp[ia]
                d = np.linalg.norm((rp + t)[:, None, :] - g_pts[None, :, :], axis=2)
                cand = (d <= loc_radius) & ang_ok
                if np.count_nonzero(cand.any(axis=1)) <= best:
                    continue    # greedy count cannot beat the incumbent
                count = 0
                used = np.zeros(len(g_pts), dtype=bool)
                for i in range(len(p_pts)):
                    js = np.nonzero(cand[i] & ~used)[0]
                    if js.size:
                        used[js[np.argmin(d[i, js])]] = True
                        count += 1
                best = max(best, count)
        if best == min(len(p_pts), len(g_pts)):
            break
    return best / np.sqrt(len(probe) * len(gallery_item))


@dataclass(frozen=True)
class ScoreMatrix:
    scores: np.ndarray        # (n_probes, n_gallery)
    true_mate: np.ndarray     # gallery index of each probe's true mate

    def __post_init__(self):
        if not np.all(np.isfinite(self.scores)):
            raise ValueError("scores must be finite")
        if len(self.true_mate) != self.scores.shape[0]:
            raise ValueError("true_mate length mismatch")


def mate_ranks(matrix: ScoreMatrix) -> np.ndarray:
    """Rank of each probe's true mate under descending scores, ties broken
    by ascending gallery index."""
    ranks = np.empty(matrix.scores.shape[0], dtype=int)
    for i, row in enumerate(matrix.scores):
        t = matrix.true_mate[i]
        better = np.sum(row > row[t])
        tied_before = np.sum((row == row[t]) & (np.arange(len(row)) < t))
        ranks[i] = 1 + better + tied_before
    return ranks


def cmc_curve(matrix: ScoreMatrix, max_rank: int = None):
    """accuracy(k) = fraction of probes whose true mate ranks <= k."""
    ranks = mate_ranks(matrix)
    n_gallery = matrix.scores.shape[1]
    max_rank = max_rank or n_gallery
    return [float(np.mean(ranks <= k)) for k in range(1, max_rank + 1)]
