"""Command-line entry point: synth-data, train, enhance, eval, plot,
selfcheck subcommands over a layered key=value configuration.

Precedence: config file < LATENTFP_* environment variables < flags.
"""

import argparse
import os
import sys

import numpy as np

ENV_PREFIX = "LATENTFP_"

CONFIG_DEFAULTS = {
    "seed": 0,
    "eta": 0.001,
    "learning_rate": 0.001,
    "sigma": 8.0,
    "r": 17,
    "window": 192,
    "step": 8,
    "lambda_min": 0.2,
    "lambda_max": 0.8,
    "patch_size": 192,
    "batch_size": 16,
    "iterations": 50000,
    "checkpoint_every": 1000,
    "latents_per_print": 10,
    "print_size": 192,
    "num_prints": 10,
    "loc_radius": 15.0,
    "angle_tol_deg": 30.0,
}


def load_config(path=None, overrides=None):
    """Layered config: defaults, then file, then environment, then flags."""
    cfg = dict(CONFIG_DEFAULTS)

    def coerce(key, value):
        kind = type(CONFIG_DEFAULTS.get(key, ""))
        if kind is bool:
            return str(value).lower() in ("1", "true", "yes")
        if kind in (int, float):
            return kind(value)
        return value

    if path:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
                key, value = (s.strip() for s in line.split("=", 1))
                cfg[key] = coerce(key, value)
    for key in CONFIG_DEFAULTS:
        env = os.environ.get(ENV_PREFIX + key.upper())
        if env is not None:
            cfg[key] = coerce(key, env)
    for key, value in (overrides or {}).items():
        if value is not None:
            cfg[key] = coerce(key, value)
    _validate_config(cfg)
    return cfg


def _validate_config(cfg):
    if cfg["eta"] < 0 or cfg["learning_rate"] <= 0 or cfg["sigma"] <= 0:
        raise ValueError("eta/learning_rate/sigma out of range")
    if cfg["r"] < 1 or cfg["window"] < 1 or not 1 <= cfg["step"] <= cfg["window"]:
        raise ValueError("window/step/r out of range")
    if not 0 <= cfg["lambda_min"] <= cfg["lambda_max"] <= 1:
        raise ValueError("lambda range invalid")


def dump_config(cfg, stream=None):
    stream = stream if stream is not None else sys.stdout
    for key in sorted(cfg):
        stream.write(f"{key}={cfg[key]}\n")


def _add_common(parser):
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--dump-config", action="store_true")


def _load_minutiae_dir(path):
    from .core import read_minutiae
    out = {}
    for name in sorted(os.listdir(path)):
        if name.endswith(".txt"):
            out[os.path.splitext(name)[0]] = read_minutiae(os.path.join(path, name))
    return out


def cmd_synth_data(args, cfg):
    from .core import RandomSource, load_gray_image
    from .synthesis import (SynthesisConfig, procedural_background, procedural_print,
                            write_dataset)
    from .tvdecomp import TVConfig
    from .weightmap import WeightMapParams

    rng = RandomSource(cfg["seed"])
    size = (cfg["print_size"], cfg["print_size"])
    if args.prints_dir:
        names = sorted(n for n in os.listdir(args.prints_dir) if n.endswith(".png"))
        prints = [load_gray_image(os.path.join(args.prints_dir, n)) for n in names]
        names = [os.path.splitext(n)[0] for n in names]
    else:
        prints = [procedural_print(size, rng.spawn(1000 + i)) for i in range(cfg["num_prints"])]
        names = None
    if args.backgrounds_dir:
        backgrounds = [load_gray_image(os.path.join(args.backgrounds_dir, n))
                       for n in sorted(os.listdir(args.backgrounds_dir)) if n.endswith(".png")]
    else:
        backgrounds = [procedural_background(size, rng.spawn(2000 + i)) for i in range(4)]
    syn_cfg = SynthesisConfig(
        lambda_range=(cfg["lambda_min"], cfg["lambda_max"]),
        latents_per_print=cfg["latents_per_print"],
        tv=TVConfig(),
        weight=WeightMapParams(sigma=cfg["sigma"], r=cfg["r"]),
    )
    manifest = write_dataset(args.out, prints, backgrounds, seed=cfg["seed"],
                             cfg=syn_cfg, min_quality=args.min_quality, names=names)
    print(f"wrote {manifest}")
    return 0


def cmd_train(args, cfg):
    from .training import LossConfig, PairDataset, TrainConfig, train

    train_cfg = TrainConfig(
        learning_rate=cfg["learning_rate"], batch_size=cfg["batch_size"],
        max_iterations=cfg["iterations"], patch_size=cfg["patch_size"],
        checkpoint_every=cfg["checkpoint_every"], seed=cfg["seed"],
        no_discriminator=args.no_discriminator, gray_gt=args.gray_gt,
        no_weight=args.no_weight)
    loss_cfg = LossConfig(eta=cfg["eta"])
    dataset = PairDataset(os.path.join(args.data, "manifest.tsv"),
                          gray_gt=args.gray_gt, no_weight=args.no_weight)
    state = None
    if args.resume:
        from .network import load_checkpoint
        from .training import init_state
        state = init_state(train_cfg, loss_cfg)
        state.iteration = load_checkpoint(args.resume, state.generator,
                                          state.discriminator, state.opt_g, state.opt_d)
    train(dataset, train_cfg, loss_cfg, out_dir=args.out, state=state)
    print(f"training finished; artifacts under {args.out}")
    return 0


def cmd_enhance(args, cfg):
    from .core import load_gray_image, save_gray_image
    from .inference import InferenceConfig, binarize, enhance_full_image, torch_predictor
    from .network import load_generator

    gen = load_generator(args.checkpoint)
    predict = torch_predictor(gen)
    inf_cfg = InferenceConfig(window=cfg["window"], step=cfg["step"],
                              aggregation=args.aggregation)
    os.makedirs(args.out, exist_ok=True)
    for name in sorted(os.listdir(getattr(args, "in"))):
        if not name.endswith(".png"):
            continue
        img = load_gray_image(os.path.join(getattr(args, "in"), name))
        enhanced = enhance_full_image(img, predict, inf_cfg)
        if args.binarize:
            enhanced = binarize(enhanced).astype(np.float64)
        save_gray_image(enhanced, os.path.join(args.out, name))
    print(f"enhanced images written to {args.out}")
    return 0


def cmd_eval(args, cfg):
    from .evaluation import MatchTolerance, ScoreMatrix, cmc_curve, match_minutiae, similarity_score

    if args.eval_command == "recover":
        tol = MatchTolerance(loc_radius=cfg["loc_radius"],
                             angle_tol=np.deg2rad(cfg["angle_tol_deg"]))
        extracted = _load_minutiae_dir(args.extracted)
        genuine = _load_minutiae_dir(args.genuine)
        common = sorted(set(extracted) & set(genuine))
        total_rec = total_fake = 0
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("image\trecovered_genuine\tintroduced_fake\tn_extracted\tn_genuine\n")
            for name in common:
                row = match_minutiae(extracted[name], genuine[name], tol)
                total_rec += row.recovered_genuine
                total_fake += row.introduced_fake
                fh.write(f"{name}\t{row.recovered_genuine}\t{row.introduced_fake}"
                         f"\t{row.n_extracted}\t{row.n_genuine}\n")
            fh.write(f"TOTAL\t{total_rec}\t{total_fake}\t-\t-\n")
        print(f"recovery report written to {args.out}")
        return 0

    probes = _load_minutiae_dir(args.probes)
    gallery = _load_minutiae_dir(args.gallery)
    probe_names = sorted(probes)
    gallery_names = sorted(gallery)
    scores = np.array([[similarity_score(probes[p], gallery[g]) for g in gallery_names]
                       for p in probe_names])
    true_mate = np.array([gallery_names.index(p) if p in gallery_names else 0
                          for p in probe_names])
    curve = cmc_curve(ScoreMatrix(scores=scores, true_mate=true_mate))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("rank,accuracy\n")
        for k, acc in enumerate(curve, start=1):
            fh.write(f"{k},{acc}\n")
    if args.plot:
        _plot_cmc(args.out, args.plot)
    print(f"CMC written to {args.out}")
    return 0


def _plot_cmc(csv_path, out_path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    data = np.genfromtxt(csv_path, delimiter=",", skip_header=1)
    data = np.atleast_2d(data)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(data[:, 0], 100.0 * data[:, 1], marker="o", markersize=3)
    ax.set_xlabel("rank")
    ax.set_ylabel("identification accuracy (%)")
    ax.set_ylim(0, 102)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)


def cmd_plot(args, cfg):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(args.out, exist_ok=True)
    wrote = []
    if args.metrics:
        rows = np.genfromtxt(args.metrics, delimiter="\t", skip_header=2)
        rows = np.atleast_2d(rows)
        fig, axes = plt.subplots(1, 2, figsize=(9, 4))
        axes[0].plot(rows[:, 0], rows[:, 3], label="weighted L1")
        axes[0].set_xlabel("iteration")
        axes[0].legend()
        if np.isfinite(rows[:, 1]).any():
            axes[1].plot(rows[:, 0], rows[:, 1], label="d loss")
            axes[1].plot(rows[:, 0], rows[:, 2], label="g adv")
        axes[1].set_xlabel("iteration")
        axes[1].legend()
        fig.tight_layout()
        path = os.path.join(args.out, "training_curves.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        wrote.append(path)
    if args.cmc:
        path = os.path.join(args.out, "cmc_curve.png")
        _plot_cmc(args.cmc, path)
        wrote.append(path)
    for p in wrote:
        print(f"wrote {p}")
    return 0


def cmd_selfcheck(args, cfg):
    from .selfcheck import run_selfcheck
    ok = run_selfcheck(verbose=True)
    return 0 if ok else 2


def build_parser():
    parser = argparse.ArgumentParser(prog="latentfp",
                                     description="latent fingerprint enhancement pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth-data", help="generate a synthetic training dataset")
    _add_common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--prints-dir", help="directory of rolled-print PNGs (default: procedural)")
    p.add_argument("--backgrounds-dir", help="directory of background PNGs (default: procedural)")
    p.add_argument("--num-prints", type=int, default=None)
    p.add_argument("--print-size", type=int, default=None)
    p.add_argument("--latents-per-print", type=int, default=None)
    p.add_argument("--min-quality", type=float, default=0.5)
    p.set_defaults(func=cmd_synth_data,
                   cfg_keys={"num_prints": "num_prints", "print_size": "print_size",
                             "latents_per_print": "latents_per_print"})

    p = sub.add_parser("train", help="train the enhancement network")
    _add_common(p)
    p.add_argument("--data", required=True, help="dataset directory with manifest.tsv")
    p.add_argument("--out", required=True)
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--patch-size", type=int, default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--resume", help="checkpoint to resume from")
    p.add_argument("--no-discriminator", action="store_true")
    p.add_argument("--gray-gt", action="store_true")
    p.add_argument("--no-weight", action="store_true")
    p.set_defaults(func=cmd_train,
                   cfg_keys={"iterations": "iterations", "batch_size": "batch_size",
                             "patch_size": "patch_size", "eta": "eta"})

    p = sub.add_parser("enhance", help="enhance latent images with a trained model")
    _add_common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--in", dest="in", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--step", type=int, default=None)
    p.add_argument("--patch-size", type=int, default=None)
    p.add_argument("--aggregation", choices=["mean", "gaussian"], default="mean")
    p.add_argument("--binarize", action="store_true")
    p.set_defaults(func=cmd_enhance,
                   cfg_keys={"window": "window", "step": "step", "patch_size": "patch_size"})

    p = sub.add_parser("eval", help="minutia recovery and identification evaluation")
    esub = p.add_subparsers(dest="eval_command", required=True)
    pr = esub.add_parser("recover")
    _add_common(pr)
    pr.add_argument("--extracted", required=True)
    pr.add_argument("--genuine", required=True)
    pr.add_argument("--out", required=True)
    pr.add_argument("--loc-radius", type=float, default=None)
    pr.add_argument("--angle-tol-deg", type=float, default=None)
    pr.set_defaults(func=cmd_eval,
                    cfg_keys={"loc_radius": "loc_radius", "angle_tol_deg": "angle_tol_deg"})
    pc = esub.add_parser("cmc")
    _add_common(pc)
    pc.add_argument("--probes", required=True)
    pc.add_argument("--gallery", required=True)
    pc.add_argument("--out", required=True)
    pc.add_argument("--plot", help="also render the curve to this image path")
    pc.set_defaults(func=cmd_eval, cfg_keys={})

    p = sub.add_parser("plot", help="render metrics logs and CMC curves")
    _add_common(p)
    p.add_argument("--metrics", help="metrics.tsv from training")
    p.add_argument("--cmc", help="CMC csv from eval")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot, cfg_keys={})

    p = sub.add_parser("selfcheck", help="run the analytic example suite")
    _add_common(p)
    p.set_defaults(func=cmd_selfcheck, cfg_keys={})
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    overrides = {"seed": args.seed}
    for cfg_key, attr in getattr(args, "cfg_keys", {}).items():
        overrides[cfg_key] = getattr(args, attr, None)
    try:
        cfg = load_config(getattr(args, "config", None), overrides)
    except (ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    if getattr(args, "dump_config", False):
        dump_config(cfg)
    try:
        return args.func(args, cfg)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
