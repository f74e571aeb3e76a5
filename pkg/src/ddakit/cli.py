"""``ddakit`` command line: lda-demo, train, eval, hist.

Configuration is a flat ``key=value`` file (``--config PATH``) plus
``--key value`` overrides. Unknown keys are rejected. ``DDAKIT_SEED``
overrides the seed. Exit codes: 0 ok, 1 runtime failure, 2 usage/config error.
"""
import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import experiments as ex
from . import net as nn
from . import segmetrics as sm
from . import synthdata as sd
from .errors import ConfigError, DDAKitError

REQUIRED = object()

COMMON = {"seed": (int, 0), "out_dir": (str, REQUIRED)}
DATA = {
    "n_images": (int, 16),
    "size": (int, 32),
    "noise": (float, 0.1),
    "data_seed": (int, None),
    "split": (str, "test"),
    "images_dir": (str, ""),
    "normalize": (str, "minmax"),
    "checkpoint": (str, REQUIRED),
}
SCHEMAS = {
    "lda-demo": {**COMMON, "n_per_class": (int, 500), "train_net": (bool, True), "bins": (int, 30),
                 "svg": (bool, False)},
    "train": {
        **COMMON,
        "loss": (str, REQUIRED),
        "dda_variant": (str, "eig"),
        "dda_eps": (float, 1e-8),
        "hidden": (str, "32"),
        "activation": (str, "tanh"),
        "lr": (float, 1e-3),
        "beta1": (float, 0.9),
        "beta2": (float, 0.999),
        "weight_decay": (float, 0.01),
        "adam_eps": (float, 1e-8),
        "epochs": (int, 100),
        "batch_size": (int, 4),
        "patience": (int, 20),
        "n_train": (int, 64),
        "n_val": (int, 16),
        "size": (int, 32),
        "noise": (float, 0.1),
        "data_seed": (int, None),
    },
    "eval": {**COMMON, **DATA, "threshold": (float, 0.5), "save_masks": (bool, False)},
    "hist": {**COMMON, **DATA, "bins": (int, 20), "grid": (int, 256), "svg": (bool, False)},
}


def _parse_bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def read_config_file(path) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def parse_overrides(tokens) -> dict:
    out, i = {}, 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, val = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(tokens):
                raise ConfigError(f"missing value for --{key}")
            val = tokens[i + 1]
            i += 2
        out[key.replace("-", "_")] = val
    return out


def resolve_config(command, raw: dict, env=None) -> dict:
    """Type-check ``raw`` against the command schema; fill defaults."""
    env = os.environ if env is None else env
    schema = SCHEMAS[command]
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    cfg = {}
    for key, (typ, default) in schema.items():
        if key in raw:
            try:
                cfg[key] = _parse_bool(raw[key]) if typ is bool else typ(raw[key])
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {exc}") from exc
        elif default is REQUIRED:
            raise ConfigError(f"missing required config key: {key}")
        else:
            cfg[key] = default
    if env.get("DDAKIT_SEED"):
        try:
            cfg["seed"] = int(env["DDAKIT_SEED"])
        except ValueError as exc:
            raise ConfigError("DDAKIT_SEED must be an integer") from exc
    if "data_seed" in cfg and cfg["data_seed"] is None:
        cfg["data_seed"] = cfg["seed"]
    return cfg


# --- output helpers -------------------------------------------------------

def _num(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_num(v) for v in row])


def write_manifest(out_dir, command, cfg, extra=None):
    lines = [f"command={command}", f"toolkit_version={__version__}"]
    lines += [f"{k}={_num(v)}" for k, v in sorted(cfg.items())]
    lines += [f"{k}={_num(v)}" for k, v in sorted((extra or {}).items())]
    Path(out_dir, "manifest.txt").write_text("\n".join(lines) + "\n")


def histogram_svg(path, edges, series, width=400, height=200):
    """Minimal step-free bar chart; ``series`` is a list of (label, counts, colour)."""
    peak = max(float(np.max(c)) for _, c, _ in series) or 1.0
    n = len(edges) - 1
    bw = width / n
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height + 20}">']
    for label, counts, colour in series:
        d = []
        for i, c in enumerate(counts):
            h = height * float(c) / peak
            d.append(f"M{i * bw:.2f},{height:.2f}h{bw:.2f}v{-h:.2f}h{-bw:.2f}z")
        parts.append(f'<path d="{"".join(d)}" fill="{colour}" fill-opacity="0.5"><title>{label}</title></path>')
    parts.append(f'<text x="0" y="{height + 15}" font-size="10">0</text>')
    parts.append(f'<text x="{width - 10}" y="{height + 15}" font-size="10">1</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")


# --- commands -------------------------------------------------------------

def cmd_lda_demo(cfg):
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    res = ex.run_lda_demo(cfg["seed"], cfg["n_per_class"], cfg["train_net"])
    fit_rows, summary = [], []
    for regime in ("separable", "inseparable"):
        s, r = res[regime]
        sd.write_samples_csv(out / f"{regime}_samples.csv", s)
        d = r["lda"]
        fit_rows.append([regime, *d.w, d.w0, r["accuracy"], r["best_cut_accuracy"], r["fisher"]])
        y = r["projected"]
        edges = np.linspace(y.min(), y.max(), cfg["bins"] + 1)
        c0 = np.histogram(y[s.labels == 0], bins=edges)[0]
        c1 = np.histogram(y[s.labels == 1], bins=edges)[0]
        write_csv(out / f"{regime}_projected_hist.csv", ["bin_lo", "bin_hi", "class0", "class1"],
                  zip(edges[:-1], edges[1:], c0, c1))
        if cfg["svg"]:
            histogram_svg(out / f"{regime}_projected_hist.svg", edges,
                          [("class0", c0, "steelblue"), ("class1", c1, "darkorange")])
        summary += [(f"{regime}_lda_accuracy", r["accuracy"]),
                    (f"{regime}_best_cut_accuracy", r["best_cut_accuracy"]),
                    (f"{regime}_fisher", r["fisher"])]
    dim = len(fit_rows[0]) - 5
    write_csv(out / "lda_fit.csv",
              ["regime"] + [f"w{j}" for j in range(dim)] + ["bias", "accuracy", "best_cut_accuracy", "fisher"],
              fit_rows)
    if "ring_net" in res:
        rn = res["ring_net"]
        summary += [("ring_net_accuracy", rn["accuracy"]),
                    ("ring_net_initial_dda", rn["trace"][0].train_loss),
                    ("ring_net_final_dda", rn["trace"][-1].train_loss)]
    write_csv(out / "summary.csv", ["key", "value"], summary)
    write_manifest(out, "lda-demo", cfg, {"net_config": ex.RING_NET})
    for k, v in summary:
        print(f"{k}: {v:.6g}")


def cmd_train(cfg):
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    try:
        kind = nn.LossKind(cfg["loss"])
        hidden = [int(h) for h in cfg["hidden"].split(",") if h.strip()]
        tcfg = nn.TrainConfig(
            lr=cfg["lr"], beta1=cfg["beta1"], beta2=cfg["beta2"],
            weight_decay=cfg["weight_decay"], eps=cfg["adam_eps"], epochs=cfg["epochs"],
            batch_size=cfg["batch_size"], seed=cfg["seed"], loss_kind=kind,
            dda_variant=cfg["dda_variant"], dda_eps=cfg["dda_eps"], patience=cfg["patience"],
        )
        activation = nn.Activation(cfg["activation"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    train_images = sd.synth_segmentation_set(cfg["data_seed"], cfg["n_train"], cfg["size"], cfg["noise"], "train")
    x, y, g = nn.image_dataset(train_images)
    val = None
    if cfg["n_val"] > 0:
        val_images = sd.synth_segmentation_set(cfg["data_seed"], cfg["n_val"], cfg["size"], cfg["noise"], "val")
        xv, yv, _ = nn.image_dataset(val_images)
        val = (xv, yv)
    net = nn.init_net([nn.N_PIXEL_FEATURES, *hidden, 1], activation, seed=cfg["seed"])
    if cfg["epochs"] > 0:
        net, trace = nn.train(net, x, y, tcfg, groups=g, val=val)
    else:
        trace = [nn.EpochRecord(0, nn.evaluate_loss(nn.predict(net, x), y, tcfg).value, float("nan"), 0)]
    meta = {"loss_kind": kind.value, "dda_variant": tcfg.dda_variant.value,
            "train_config": nn.config_dict(tcfg), "toolkit_version": __version__}
    nn.save_checkpoint(out / "checkpoint.json", net, meta)
    write_csv(out / "loss.csv", ["epoch", "train_loss", "val_loss", "skipped_batches"],
              [(r.epoch, r.train_loss, r.val_loss, r.skipped_batches) for r in trace])
    write_manifest(out, "train", cfg, {"loss_variant": tcfg.dda_variant.value if kind == nn.LossKind.DDA else "n/a",
                                       "epochs_run": trace[-1].epoch})
    print(f"trained {kind.value} for {trace[-1].epoch} epochs: loss {trace[0].train_loss:.6g} -> {trace[-1].train_loss:.6g}")


def _load_scorer(cfg):
    if cfg["checkpoint"] == "oracle":
        return None, "oracle"
    path = Path(cfg["checkpoint"])
    if not path.is_file():
        raise ConfigError(f"checkpoint not found: {path}")
    net, meta = nn.load_checkpoint(path)
    return net, meta.get("loss_kind", "bce")


def _eval_images(cfg):
    if cfg["images_dir"]:
        d = Path(cfg["images_dir"])
        if not d.is_dir():
            raise ConfigError(f"images_dir not found: {d}")
        images = []
        for img_path in sorted(d.glob("*_image.pgm")):
            name = img_path.name[: -len("_image.pgm")]
            mask_path = d / f"{name}_mask.pgm"
            images.append(sd.SynthImage(sd.read_pgm(img_path), sd.read_pgm(mask_path, as_mask=True), name, -1))
        if not images:
            raise ConfigError(f"no *_image.pgm files in {d}")
        return images
    if cfg["split"] not in sd.SPLITS:
        raise ConfigError(f"split must be one of {sorted(sd.SPLITS)}")
    return sd.synth_segmentation_set(cfg["data_seed"], cfg["n_images"], cfg["size"], cfg["noise"], cfg["split"])


def _score_image(net, kind, im):
    if net is None:
        return im.mask.astype(np.float64)
    s = ex.model_scores(net, nn.pixel_features(im.image), kind)
    return s.reshape(im.mask.shape)


def cmd_eval(cfg):
    net, kind = _load_scorer(cfg)
    images = _eval_images(cfg)
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    reports = []
    for im in images:
        scores = _score_image(net, kind, im)
        rep = sm.evaluate(scores, im.mask, cfg["threshold"], cfg["normalize"])
        reports.append((im.spec_id, rep))
        if cfg["save_masks"]:
            norm, _ = sm.normalize(scores, cfg["normalize"])
            (out / "masks").mkdir(exist_ok=True)
            sd.write_pgm(out / "masks" / f"{im.spec_id}_pred.pgm", (norm >= cfg["threshold"]).astype(np.uint8))
    sm.write_report_csv(out / "metrics.csv", reports)
    write_manifest(out, "eval", cfg, {"scorer_loss_kind": kind})
    mean = sm.mean_report([r for _, r in reports])
    print(f"MEAN iou={mean.iou:.4f} f1={mean.f1:.4f} fbeta={mean.f_beta:.4f} auc={mean.auc:.4f} "
          f"biou={mean.b_iou:.4f} bf1={mean.b_f1:.4f} bfbeta={mean.b_f_beta:.4f}")


def cmd_hist(cfg):
    net, kind = _load_scorer(cfg)
    images = _eval_images(cfg)
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    pooled, gts = [], []
    for im in images:
        norm, _ = sm.normalize(_score_image(net, kind, im), cfg["normalize"])
        pooled.append(norm.ravel())
        gts.append(im.mask.ravel().astype(bool))
    scores, gt = np.concatenate(pooled), np.concatenate(gts)
    rep = ex.separation_report(scores, gt, ex.SegConfig(bins=cfg["bins"], grid=cfg["grid"]))
    h = rep["histogram"]
    write_csv(out / "histogram.csv", ["bin_lo", "bin_hi", "fg_count", "bg_count"],
              zip(h.edges[:-1], h.edges[1:], h.fg_counts, h.bg_counts))
    at_theta = {}
    for obj, col in (("iou", 0), ("f1", 1), ("fbeta", 2)):
        at_theta[obj] = sm.region_metrics(scores >= rep[f"theta_{obj}"], gt)[col]
    summary = [
        ("overlap", h.overlap), ("fg_mean", h.fg_mean), ("bg_mean", h.bg_mean),
        ("fg_var", h.fg_var), ("bg_var", h.bg_var), ("dda_separability", rep["separability"]),
        ("theta_iou", rep["theta_iou"]), ("theta_f1", rep["theta_f1"]), ("theta_fbeta", rep["theta_fbeta"]),
        ("iou_at_theta", at_theta["iou"]), ("f1_at_theta", at_theta["f1"]), ("fbeta_at_theta", at_theta["fbeta"]),
    ]
    write_csv(out / "summary.csv", ["key", "value"], summary)
    if cfg["svg"]:
        histogram_svg(out / "histogram.svg", h.edges,
                      [("foreground", h.fg_counts / h.n_fg, "darkorange"),
                       ("background", h.bg_counts / h.n_bg, "steelblue")])
    write_manifest(out, "hist", cfg, {"scorer_loss_kind": kind})
    for k, v in summary:
        print(f"{k}: {v:.6g}")


COMMANDS = {"lda-demo": cmd_lda_demo, "train": cmd_train, "eval": cmd_eval, "hist": cmd_hist}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ddakit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="key=value configuration file")
    args, rest = parser.parse_known_args(argv)
    try:
        raw = read_config_file(args.config) if args.config else {}
        raw.update(parse_overrides(rest))
        cfg = resolve_config(args.command, raw)
        COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"ddakit {args.command}: config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"ddakit {args.command}: {exc}", file=sys.stderr)
        return 1
    except DDAKitError as exc:
        print(f"ddakit {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
