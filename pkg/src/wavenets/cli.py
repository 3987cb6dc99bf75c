"""``wavenets`` command-line interface.

Results go to stdout, diagnostics to stderr. Exit status: 0 on success,
1 on user error, 2 when a verification check fails.
"""
import argparse
import logging
import os
from pathlib import Path
import sys
import time

import numpy as np

from . import bench, checkpoint, config as runconfig, data, raster, verify
from .attention import SQUEEZE_MODES
from .filterbank import build_assignment
from .nn.model import build_classifier, census_report
from .nn.serialize import bank_entries, banks_from_entries, load_network, save_network
from .nn.train import evaluate, train
from .tensor import Rng
from .wavelet import AVERAGING, NORM_MODES, ORTHONORMAL, SUBBAND_NAMES, dwt2d_conv, dwt2d_matmul, haar

log = logging.getLogger("wavenets")

EXIT_OK, EXIT_USER, EXIT_VERIFY = 0, 1, 2


class UserError(Exception):
    pass


def _read_raster(path):
    path = Path(path)
    if not path.exists():
        raise UserError(f"cannot read {path}: no such file")
    try:
        if path.suffix.lower() in (".idx", ".ubyte") or path.name.endswith("-ubyte"):
            return data.read_idx(path).images[0, 0]
        return raster.read_pgm(path)
    except ValueError as exc:
        raise UserError(f"cannot read {path}: {exc}") from None


def _bank(args):
    if args.bank == "haar":
        return haar(args.mode)
    if args.mode != ORTHONORMAL:
        raise UserError("random banks are orthonormal; --mode averaging applies to haar only")
    from .filterbank import random_orthogonal_bank
    return random_orthogonal_bank(Rng(args.seed), args.d)


def cmd_dwt(args):
    x = _read_raster(args.input)
    bank = _bank(args)
    if args.path == "matmul":
        if not bank.separable:
            raise UserError("--path matmul needs the separable haar bank")
        if x.shape[0] % 2 or x.shape[1] % 2:
            raise UserError(f"--path matmul needs even image dimensions, got {x.shape}")
        sub = dwt2d_matmul(x, bank)
    else:
        sub = dwt2d_conv(x, bank)
        sub = type(sub).from_stack(sub.stack()[:, 0, 0])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, band in zip(SUBBAND_NAMES, sub.stack()):
        raster.write_pgm(out / f"{name}.pgm", band)
    checkpoint.save(out / "subbands.wvnc", dict(zip(SUBBAND_NAMES, sub.stack())))
    energies = sub.energies()
    lines = [f"input {x.shape[0]}x{x.shape[1]} energy {float(np.sum(x * x)):.12g}",
             f"levels 1", f"path {args.path}", f"bank {args.bank} d={bank.d} {bank.norm_mode}"]
    lines += [f"energy_{k} {v:.12g}" for k, v in energies.items()]
    text = "\n".join(lines) + "\n"
    (out / "summary.txt").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def _print_gram(name, bank):
    print(f"{name} d={bank.d} max|G-I|={bank.orthonormality_error():.3e}")
    for row in bank.gram():
        print("  " + " ".join(f"{v:+.12f}" for v in row))


def cmd_filters(args):
    if args.import_path:
        try:
            banks = banks_from_entries(checkpoint.load(args.import_path))
        except (OSError, ValueError) as exc:
            raise UserError(f"cannot load {args.import_path}: {exc}") from None
        if not banks:
            raise UserError(f"{args.import_path} holds no filter banks")
    else:
        banks = build_assignment(Rng(args.seed), args.d, args.scale).named_banks()
    for name, bank in banks.items():
        _print_gram(name, bank)
    if args.out:
        entries = {f"filters.{k}": b.filters for k, b in banks.items()}
        checkpoint.save(args.out, entries)
        log.info("wrote %d banks to %s", len(banks), args.out)
    return EXIT_OK


def cmd_verify(args):
    banks = None
    if args.filters:
        try:
            banks = list(banks_from_entries(checkpoint.load(args.filters)).values())
        except (OSError, ValueError) as exc:
            raise UserError(f"cannot load {args.filters}: {exc}") from None
    results = verify.run_all(args.seeds, banks=banks, quick=args.quick)
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_VERIFY if failed else EXIT_OK


def _load_config(args):
    try:
        cfg = runconfig.load(args.config) if args.config else runconfig.default()
    except OSError as exc:
        raise UserError(f"cannot read config: {exc}") from None
    except runconfig.ConfigError as exc:
        raise UserError(f"config error: {exc}") from None
    overrides = {}
    for key in ("seed", "d", "epochs"):
        if getattr(args, key, None) is not None:
            overrides[key] = getattr(args, key)
    if getattr(args, "squeeze", None):
        overrides["squeeze_mode"] = args.squeeze
    if overrides:
        text = "".join(f"{k} = {v}\n" for k, v in overrides.items())
        cfg = runconfig.parse(text, cfg)
    return cfg


def load_dataset(cfg):
    """Build (train, test) for a run config, normalized with train statistics."""
    if cfg.dataset == "synthetic":
        ds = data.synth_textures(cfg.data_seed, cfg.n_samples, cfg.num_classes)
    elif cfg.dataset == "idx":
        if not cfg.idx_images or not cfg.idx_labels:
            raise UserError("dataset = idx needs idx_images and idx_labels")
        ds = data.read_idx(cfg.idx_images, cfg.idx_labels, cfg.num_classes)
    else:
        raise UserError(f"unknown dataset {cfg.dataset!r}; expected synthetic or idx")
    tr, te = data.split(ds, cfg.train_ratio, cfg.data_seed)
    tr = data.normalize(tr)
    te = data.normalize(te, tr.meta["mean"], tr.meta["std"])
    return tr, te


def cmd_train(args):
    cfg = _load_config(args)
    tr, te = load_dataset(cfg)
    net = build_classifier(cfg.model_config(tr.images.shape[1]))
    log.info("census\n%s", census_report(net))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "run.cfg").write_text(cfg.dumps())
    t0 = time.perf_counter()
    rows = train(net, tr, te, cfg.train_config(), out / "metrics.csv")
    save_network(out / "model.wvnc", net, {"data_mean": tr.meta["mean"], "data_std": tr.meta["std"]})
    last = rows[-1]
    print(f"trained {cfg.epochs} epochs in {time.perf_counter() - t0:.1f}s "
          f"test_acc {last['test_acc']:.4f} squeeze {cfg.squeeze_mode}")
    print(f"checkpoint {out / 'model.wvnc'}")
    return EXIT_OK


def cmd_eval(args):
    try:
        net, meta = load_network(args.checkpoint)
    except OSError as exc:
        raise UserError(f"cannot read checkpoint: {exc}") from None
    except checkpoint.CheckpointError as exc:
        raise UserError(f"refusing to load checkpoint: {exc}") from None
    cfg = _load_config(args)
    tr, te = load_dataset(cfg)
    ds = te if args.split == "test" else tr
    if "data_mean" in meta:
        # re-normalize with the statistics the network was trained with
        raw_mean, raw_std = ds.meta["mean"], ds.meta["std"]
        images = ds.images * raw_std + raw_mean
        images = (images - meta["data_mean"][0]) / meta["data_std"][0]
    else:
        images = ds.images
    loss, acc = evaluate(net, images, ds.labels)
    print(f"accuracy {acc:.4f}")
    print(f"loss {loss:.6f}")
    print(f"samples {len(ds)}")
    return EXIT_OK


def cmd_bench(args):
    sizes = tuple(int(s) for s in args.sizes.split(","))
    print(f"# kernel backends (active: {bench.kernels.BACKEND})")
    print(bench.format_table(bench.kernel_rows(sizes, repeat=args.repeat)))
    print("# dwt paths, single image")
    print(bench.format_table(bench.dwt_path_rows(sizes, repeat=args.repeat)))
    print("# squeeze modes, 32x64 channels")
    print(bench.format_table(bench.squeeze_rows(sizes, repeat=args.repeat)))
    over = bench.network_overhead(repeat=args.repeat)
    print("# classifier forward, batch 32")
    print(f"gap {over['gap'] * 1e3:.3f} ms")
    print(f"wavenet_c {over['wavenet_c'] * 1e3:.3f} ms")
    print(f"wavenet_c overhead vs gap {over['overhead_pct']:.2f}%")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="wavenets", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dwt", help="single-level 2D DWT of a PGM/IDX raster")
    d.add_argument("input")
    d.add_argument("--path", choices=("matmul", "conv"), default="conv")
    d.add_argument("--bank", choices=("haar", "random"), default="haar")
    d.add_argument("--mode", choices=NORM_MODES, default=ORTHONORMAL)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--d", type=int, default=2)
    d.add_argument("--out", default="dwt_out")
    d.set_defaults(func=cmd_dwt)

    f = sub.add_parser("filters", help="generate, print and export orthonormal filter banks")
    f.add_argument("--seed", type=int, default=1)
    f.add_argument("--d", type=int, default=2)
    f.add_argument("--scale", type=int, default=1)
    f.add_argument("--out", help="write banks to a checkpoint file")
    f.add_argument("--import", dest="import_path", help="read banks from a checkpoint file")
    f.set_defaults(func=cmd_filters)

    v = sub.add_parser("verify", help="run the invariant suite")
    v.add_argument("--seeds", type=int, default=100)
    v.add_argument("--filters", help="check the banks in this checkpoint instead of fresh ones")
    v.add_argument("--quick", action="store_true", help="one seed for gradient checks")
    v.set_defaults(func=cmd_verify)

    for name, func, helptext in (("train", cmd_train, "train a classifier"),
                                 ("eval", cmd_eval, "evaluate a checkpoint")):
        t = sub.add_parser(name, help=helptext)
        if name == "eval":
            t.add_argument("checkpoint")
            t.add_argument("--split", choices=("test", "train"), default="test")
        t.add_argument("--config")
        t.add_argument("--seed", type=int)
        t.add_argument("--d", type=int)
        t.add_argument("--squeeze", choices=SQUEEZE_MODES)
        if name == "train":
            t.add_argument("--epochs", type=int)
            t.add_argument("--out", default="runs/latest")
        t.set_defaults(func=func)

    b = sub.add_parser("bench", help="time kernels, DWT paths and squeeze modes")
    b.add_argument("--sizes", default="16,32,64")
    b.add_argument("--repeat", type=int, default=5)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    threads = os.environ.get("WAVENET_THREADS")
    limiter = None
    if threads:
        from threadpoolctl import threadpool_limits
        limiter = threadpool_limits(int(threads))
    try:
        return args.func(args)
    except (UserError, runconfig.ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    finally:
        if limiter is not None:
            limiter.restore_original_limits()


if __name__ == "__main__":
    sys.exit(main())
