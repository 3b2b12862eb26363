"""Command-line front end.

Subcommands::

    pdloss compare A.pgm B.pgm        metrics and loss breakdown for an image pair
    pdloss toy-shift                  EMD vs KLD/JSD on a shifted histogram
    pdloss ablate A.pgm B.pgm         distribution term per projection scheme/factor
    pdloss descend U0.pgm V.pgm       gradient descent on the loss, writes image + CSV trace
    pdloss extract IMG --out F.fmap   export feature-bank activations
    pdloss fmap-pdl A.fmap B.fmap     loss on externally supplied features

Reports are ``key=value`` lines with sorted keys and reals printed with 9
significant digits.  Exit codes: 0 success, 2 usage or domain error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from typing import Iterable, Mapping

import numpy as np

from . import __version__
from ._parallel import thread_count
from .errors import PDLError
from .features import FeatureBankConfig, extract
from .loss import LossConfig, _pixel_term, descend, pdl_loss_features, percep_loss_features
from .metrics import PerfectMatchError, psnr
from .ot import DEFAULT_EPS, emd_hist, jsd, kld, shifted_histogram
from .projections import ProjectionConfig, Scheme, sliced_wasserstein
from .tensors import Image, fmap_read, fmap_write, image_read, image_write

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3

TRACE_HEADER = ("step", "total", "pixel", "distribution")


def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(float(value), ".9g")
    return str(value)


def format_report(values: Mapping[str, object]) -> str:
    return "".join(f"{key}={fmt(values[key])}\n" for key in sorted(values))


def _manifest(command: str, params: Mapping[str, object]) -> dict:
    out = {"manifest.command": command, "manifest.version": __version__}
    out.update({f"manifest.{k}": v for k, v in params.items()})
    return out


def _manifest_comments(command: str, params: Mapping[str, object]) -> str:
    return "".join(f"# {k}={fmt(v)}\n" for k, v in sorted(_manifest(command, params).items()))


def _loss_params(args) -> dict:
    return {
        "bank_seed": getattr(args, "bank_seed", 0),
        "factor": args.factor,
        "lambda": args.lam,
        "p": args.p,
        "q": args.q,
        "projection_resample": args.projection_resample,
        "scheme": Scheme.parse(args.scheme).value,
        "seed": args.seed,
    }


def _loss_config(args, scheme=None, factor=None, seed=None) -> LossConfig:
    projection = ProjectionConfig(
        scheme=args.scheme if scheme is None else scheme,
        factor=args.factor if factor is None else factor,
        seed=args.seed if seed is None else seed,
    )
    return LossConfig(
        lam=args.lam,
        p=args.p,
        q=args.q,
        projection=projection,
        bank=FeatureBankConfig(seed=getattr(args, "bank_seed", 0)),
    )


def _read_pair(path_a: str, path_b: str) -> tuple[Image, Image]:
    a = image_read(path_a)
    b = image_read(path_b)
    if a.shape != b.shape:
        raise ShapeMismatch(f"image shapes differ: {path_a} is {a.shape}, {path_b} is {b.shape}")
    return a, b


class ShapeMismatch(PDLError):
    pass


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_compare(args, out) -> int:
    u, v = _read_pair(args.image_a, args.image_b)
    cfg = _loss_config(args)
    fa, _ = extract(u, cfg.bank)
    fb, _ = extract(v, cfg.bank)
    pixel = _pixel_term(u, v, cfg.q)
    pdl = pdl_loss_features(fa, fb, pixel, cfg)
    percep = percep_loss_features(fa, fb, pixel, cfg)
    swd_cfg = ProjectionConfig(Scheme.RSP, args.factor, args.seed)
    try:
        psnr_db = psnr(u, v)
    except PerfectMatchError:
        psnr_db = math.inf

    report = {
        "pdl.distribution": pdl.distribution_term,
        "pdl.pixel": pdl.pixel_term,
        "pdl.total": pdl.total,
        "percep.feature": percep.distribution_term,
        "percep.pixel": percep.pixel_term,
        "percep.total": percep.total,
        "psnr": psnr_db,
        "swd": sliced_wasserstein(fa, fb, swd_cfg, cfg.p),
    }
    params = {"image_a": args.image_a, "image_b": args.image_b, **_loss_params(args)}
    report.update(_manifest("compare", params))
    out.write(format_report(report))
    return EXIT_OK


def toy_shift_table(bins: int, shift_max: int, eps: float, base: Iterable[float], bin_width: float = 1.0):
    """Rows of (shift, emd, kld, jsd, disjoint) for a base histogram shifted 0..shift_max bins."""
    base = [float(b) for b in base]
    h0 = shifted_histogram(base, 0, bins, bin_width)
    rows = []
    for k in range(shift_max + 1):
        hk = shifted_histogram(base, k, bins, bin_width)
        rows.append((k, emd_hist(h0, hk), kld(h0, hk, eps), jsd(h0, hk, eps), k >= len(base)))
    return rows


def cmd_toy_shift(args, out) -> int:
    base = [float(x) for x in args.base.split(",")]
    bins = args.bins if args.bins is not None else len(base) + args.shift_max
    rows = toy_shift_table(bins, args.shift_max, args.eps, base, args.bin_width)
    params = {"base": args.base, "bin_width": args.bin_width, "bins": bins, "eps": args.eps, "shift_max": args.shift_max}
    out.write(_manifest_comments("toy-shift", params))
    out.write("shift\temd\tkld\tjsd\tdisjoint\n")
    for k, e, kl, js, disjoint in rows:
        out.write(f"{k}\t{fmt(e)}\t{fmt(kl)}\t{fmt(js)}\t{fmt(disjoint)}\n")
    return EXIT_OK


def ablation_table(u: Image, v: Image, args, schemes, factors, seeds: int):
    """(scheme, factor, mean, stdev, runs) of the distribution term over seeds."""
    bank = FeatureBankConfig(seed=args.bank_seed)
    fa, _ = extract(u, bank)
    fb, _ = extract(v, bank)
    rows = []
    for scheme in schemes:
        scheme = Scheme.parse(scheme)
        if scheme is Scheme.ID:
            cfg = _loss_config(args, scheme=scheme, factor=1, seed=0)
            value = pdl_loss_features(fa, fb, 0.0, cfg).distribution_term
            rows.append((scheme.value, 1, value, 0.0, 1))
            continue
        for factor in factors:
            values = np.array(
                [
                    pdl_loss_features(fa, fb, 0.0, _loss_config(args, scheme, factor, args.seed + s)).distribution_term
                    for s in range(seeds)
                ]
            )
            stdev = float(values.std(ddof=1)) if seeds > 1 else 0.0
            rows.append((scheme.value, factor, float(values.mean()), stdev, seeds))
    return rows


def cmd_ablate(args, out) -> int:
    u, v = _read_pair(args.image_a, args.image_b)
    schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    factors = [int(f) for f in args.factors.split(",")]
    rows = ablation_table(u, v, args, schemes, factors, args.seeds)
    params = {
        "image_a": args.image_a,
        "image_b": args.image_b,
        "schemes": args.schemes,
        "factors": args.factors,
        "seeds": args.seeds,
        **_loss_params(args),
    }
    out.write(_manifest_comments("ablate", params))
    out.write("scheme\tfactor\tmean\tstdev\truns\n")
    for scheme, factor, mean, stdev, runs in rows:
        out.write(f"{scheme}\t{factor}\t{fmt(mean)}\t{fmt(stdev)}\t{runs}\n")
    return EXIT_OK


def cmd_descend(args, out) -> int:
    u0, v = _read_pair(args.u0, args.v)
    cfg = _loss_config(args)
    final, trace = descend(u0, v, cfg, steps=args.steps, step_size=args.step_size, resample=args.projection_resample)
    image_write(final, args.out)
    with open(args.trace, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for step, b in enumerate(trace):
            writer.writerow([step, fmt(b.total), fmt(b.pixel_term), fmt(b.distribution_term)])
    report = {
        "final.total": trace[-1].total,
        "initial.total": trace[0].total,
        "out": args.out,
        "trace": args.trace,
    }
    params = {
        "u0": args.u0,
        "v": args.v,
        "steps": args.steps,
        "step_size": args.step_size,
        **_loss_params(args),
    }
    report.update(_manifest("descend", params))
    out.write(format_report(report))
    return EXIT_OK


def cmd_extract(args, out) -> int:
    img = image_read(args.image)
    fm, _ = extract(img, FeatureBankConfig(seed=args.bank_seed))
    fmap_write(fm, args.out)
    report = {"dims": fm.dims, "out": args.out, "sites": fm.sites}
    report.update(_manifest("extract", {"image": args.image, "bank_seed": args.bank_seed}))
    out.write(format_report(report))
    return EXIT_OK


def cmd_fmap_pdl(args, out) -> int:
    fa = fmap_read(args.fmap_a)
    fb = fmap_read(args.fmap_b)
    if fa.data.shape != fb.data.shape:
        raise ShapeMismatch(f"feature map shapes differ: {fa.data.shape} vs {fb.data.shape}")
    cfg = _loss_config(args)
    pdl = pdl_loss_features(fa, fb, args.pixel_term, cfg)
    report = {
        "pdl.distribution": pdl.distribution_term,
        "pdl.pixel": pdl.pixel_term,
        "pdl.total": pdl.total,
    }
    params = {"fmap_a": args.fmap_a, "fmap_b": args.fmap_b, "pixel_term": args.pixel_term, **_loss_params(args)}
    params.pop("bank_seed")
    report.update(_manifest("fmap-pdl", params))
    out.write(format_report(report))
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return value


def _add_loss_flags(p: argparse.ArgumentParser, bank: bool = True) -> None:
    p.add_argument("--lambda", dest="lam", type=float, default=0.01, help="distribution-term weight (default 0.01)")
    p.add_argument("--scheme", default="id", choices=[s.value for s in Scheme], help="projection scheme")
    p.add_argument("--factor", type=_positive_int, default=1, help="projections per feature channel")
    p.add_argument("--seed", type=_nonneg_int, default=0, help="projection seed")
    p.add_argument("--p", type=float, default=1.0, help="feature-distance exponent")
    p.add_argument("--q", type=float, default=1.0, help="pixel exponent")
    p.add_argument(
        "--projection-resample",
        action="store_true",
        help="draw fresh projections at every descent step (seed + step)",
    )
    if bank:
        p.add_argument("--bank-seed", type=_nonneg_int, default=0, help="feature-bank weight seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pdloss", description="Projected distribution loss tools")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compare", help="PSNR, PDL breakdown, SWD and perceptual loss for two images")
    p.add_argument("image_a")
    p.add_argument("image_b")
    _add_loss_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("toy-shift", help="EMD vs KLD/JSD for a histogram shifted bin by bin")
    p.add_argument("--bins", type=_positive_int, default=None, help="histogram length (default: base + shift-max)")
    p.add_argument("--shift-max", type=_nonneg_int, default=10)
    p.add_argument("--eps", type=float, default=DEFAULT_EPS, help="additive smoothing for KLD/JSD")
    p.add_argument("--base", default="1,2,1", help="comma-separated base masses (normalised)")
    p.add_argument("--bin-width", type=float, default=1.0)
    p.set_defaults(func=cmd_toy_shift)

    p = sub.add_parser("ablate", help="distribution term across projection schemes and factors")
    p.add_argument("image_a")
    p.add_argument("image_b")
    p.add_argument("--schemes", default="id,r2p,rpp,rsp")
    p.add_argument("--factors", default="1,2,4,8")
    p.add_argument("--seeds", type=_positive_int, default=20)
    _add_loss_flags(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("descend", help="subgradient descent from U0 towards V")
    p.add_argument("u0")
    p.add_argument("v")
    p.add_argument("--steps", type=_nonneg_int, default=500)
    p.add_argument("--step-size", type=float, default=0.05)
    p.add_argument("--out", required=True, help="final image path (PGM/PPM)")
    p.add_argument("--trace", required=True, help="loss trace CSV path")
    _add_loss_flags(p)
    p.set_defaults(func=cmd_descend)

    p = sub.add_parser("extract", help="write feature-bank activations of an image as FMAP")
    p.add_argument("image")
    p.add_argument("--out", required=True)
    p.add_argument("--bank-seed", type=_nonneg_int, default=0)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("fmap-pdl", help="PDL on two FMAP feature files")
    p.add_argument("fmap_a")
    p.add_argument("fmap_b")
    p.add_argument("--pixel-term", type=float, default=0.0, help="precomputed pixel term added to the total")
    _add_loss_flags(p, bank=False)
    p.set_defaults(func=cmd_fmap_pdl)
    return parser


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        thread_count()
        return args.func(args, out)
    except OSError as exc:
        print(f"pdloss: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (PDLError, ValueError) as exc:
        print(f"pdloss: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
