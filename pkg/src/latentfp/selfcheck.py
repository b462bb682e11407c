"""Fast analytic self-checks covering the pipeline's closed-form examples.

Each check is a named predicate over a hand-computable case; `selfcheck`
on the CLI runs them all and reports one line per check. The heavyweight
verification (training runs, oracles with large sample counts) lives in the
test suite, not here.
"""

import numpy as np

from . import distortion as dist
from . import evaluation as ev
from . import inference as inf
from . import tvdecomp
from . import weightmap as wm
from .core import ENDING, Minutia, MinutiaSet, RandomSource
from .synthesis import FusionParams, SpeckleParams, add_speckle, fuse_background


def _distortion_params(**kw):
    base = dict(k=1.0, theta=0.0, e=(0.0, 0.0), o_r=(32.0, 32.0),
                o_e=(32.0, 32.0), s_x=10.0, s_y=14.0)
    base.update(kw)
    return dist.DistortionParams(**base)


def check_transition_values():
    p = _distortion_params(k=0.8)
    return (dist.gradual_transition(-0.3, p.k) == 0.0
            and abs(dist.gradual_transition(p.k / 2, p.k) - 0.5) < 1e-12
            and dist.gradual_transition(p.k, p.k) == 1.0)


def check_transition_continuity():
    p = _distortion_params(k=1.3)
    eps = 1e-7
    return (abs(dist.gradual_transition(eps, p.k)) < 1e-9
            and abs(dist.gradual_transition(p.k - eps, p.k) - 1.0) < 1e-9)


def check_ellipse_boundary():
    p = _distortion_params()
    h = dist.ellipse_distance(np.array([p.o_e[0] + p.s_x, p.o_e[1]]), p)
    h2 = dist.ellipse_distance(np.array([p.o_e[0] + 2 * p.s_x, p.o_e[1]]), p)
    h3 = dist.ellipse_distance(np.array(p.o_e), p)
    return abs(h) < 1e-9 and abs(h2 - np.sqrt(3.0)) < 1e-9 and h3 < 0


def check_displacement_translation():
    p = _distortion_params(e=(5.0, -3.0))
    d = dist.displacement(np.array([[1.0, 2.0], [7.0, 7.0]]), p)
    return np.allclose(d, [5.0, -3.0])


def check_distortion_identity():
    rng = RandomSource(3)
    img = rng.uniform(size=(48, 48))
    out = dist.distort_image(img, _distortion_params(o_r=(24.0, 24.0), o_e=(24.0, 24.0)))
    return np.array_equal(out, img)


def check_speckle_zero_preserved():
    rng = RandomSource(4)
    img = np.zeros((16, 16))
    out = add_speckle(img, SpeckleParams(variance=0.01), rng)
    return np.array_equal(out, img)


def check_fusion_endpoints():
    b = np.full((8, 8), 0.2)
    d = np.full((8, 8), 0.8)
    mid = fuse_background(b, FusionParams(lam=0.5, background=d))
    return np.allclose(mid, 0.5)


def check_tv_constant():
    cartoon, texture = tvdecomp.decompose(np.full((32, 32), 0.7))
    return np.allclose(cartoon, 0.7, atol=1e-8) and np.max(np.abs(texture)) < 1e-8


def check_tv_reconstruction():
    rng = RandomSource(5)
    img = rng.uniform(size=(32, 32))
    cartoon, texture = tvdecomp.decompose(img)
    return np.allclose(cartoon + texture, img, atol=1e-14)


def check_weight_kernel_center():
    params = wm.WeightMapParams(sigma=8.0, r=17)
    k = wm.gaussian_kernel(params)
    return (abs(k[17, 17] - 1.0 / (128.0 * np.pi)) < 1e-12
            and np.allclose(k, k.T) and k[0, 0] < k[17, 17])


def check_weight_floor():
    params = wm.WeightMapParams(sigma=8.0, r=17)
    w = wm.build_weight_map(np.zeros((40, 40)), params)
    return np.allclose(w, wm.floor_weight(params))


def check_loss_values():
    import torch
    from .training import adversarial_losses, reconstruction_loss
    out = torch.full((1, 1, 4, 4), 0.5)
    g = torch.zeros((1, 1, 4, 4))
    w = torch.ones((1, 1, 4, 4))
    ok_r = abs(float(reconstruction_loss(out, g, w)) - 0.5 * 16) < 1e-6
    d_loss, _ = adversarial_losses(torch.tensor([0.5]), torch.tensor([0.5]))
    return ok_r and abs(float(d_loss) - 2.0 * np.log(2.0)) < 1e-6


def check_tiling_200():
    oys = inf.window_origins(inf.padded_extent(200, 192, 8), 192, 8)
    return oys == [0, 8]


def check_cmc_trivial():
    scores = np.array([[0.9, 0.1], [0.2, 0.8]])
    curve = ev.cmc_curve(ev.ScoreMatrix(scores=scores, true_mate=np.array([0, 1])))
    return curve == [1.0, 1.0]


def check_match_identity():
    mins = MinutiaSet(items=(Minutia(10, 10, 0.0, ENDING), Minutia(30, 30, 1.0, ENDING)),
                      width=64, height=64)
    row = ev.match_minutiae(mins, mins)
    return row.recovered_genuine == 2 and row.introduced_fake == 0


CHECKS = [
    ("gradual transition branch values", check_transition_values),
    ("gradual transition continuity", check_transition_continuity),
    ("ellipse distance boundary/interior", check_ellipse_boundary),
    ("pure-translation displacement", check_displacement_translation),
    ("distortion identity bit-exact", check_distortion_identity),
    ("speckle preserves zeros", check_speckle_zero_preserved),
    ("background fusion midpoint", check_fusion_endpoints),
    ("TV of constant image", check_tv_constant),
    ("TV exact reconstruction", check_tv_reconstruction),
    ("weight kernel center value", check_weight_kernel_center),
    ("weight map floor", check_weight_floor),
    ("loss closed-form values", check_loss_values),
    ("sliding-window origins 200px", check_tiling_200),
    ("CMC trivial ranks", check_cmc_trivial),
    ("minutia match identity", check_match_identity),
]


def run_selfcheck(verbose: bool = False) -> bool:
    all_ok = True
    for name, fn in CHECKS:
        try:
            ok = bool(fn())
        except Exception as exc:    # a crash is a failure, keep going
            ok = False
            if verbose:
                print(f"FAIL {name}: {exc}")
                all_ok = False
                continue
        all_ok &= ok
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'} {name}")
    return all_ok
