"""Command-line front end: ``distilkit <verb> [flags]``.

Results go to stdout (or ``--out``) as CSV.  The resolved seed and the full
parameter set are printed to stderr before any result.  Exit status is 0 on
success and 2 on usage errors or invalid family parameters.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from contextlib import contextmanager
from dataclasses import replace
from fractions import Fraction

import numpy as np

from . import __version__
from .criteria import (
    is_ppt,
    isotropic_region,
    rainbow_region,
    uuvvf_region,
    werner_region,
)
from .families import (
    InvalidParameters,
    isotropic,
    rainbow,
    rainbow_top_delta,
    rainbow_top_line,
    random_density,
    uuvvf,
    watrous,
    watrous_delta,
    werner,
)
from .peasant import SearchConfig, detection_curve, n_copy_search, random_search
from .protocols import iterate_protocol
from .sampling import derive_rng
from .volume import VolumeConfig, load_config, run_volume, summarize

__all__ = ["main", "run_command", "build_parser", "classify_state", "SEED_ENV"]

SEED_ENV = "DISTILKIT_SEED"
FAMILIES = ("werner", "isotropic", "uuvvf", "watrous", "rainbow")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --------------------------------------------------------------------------
# shared helpers


def classify_state(family: str, d: int, *, beta=None, alpha=None, epsilon=None, delta=None, m=None):
    """Region verdict for a family member (used by ``classify`` and ``region-sweep``)."""
    if family == "werner":
        return werner_region(d, _need(beta, "--beta"))
    if family == "isotropic":
        return isotropic_region(d, _need(alpha, "--alpha"))
    if family == "uuvvf":
        return uuvvf_region(d, _need(epsilon, "--epsilon"), _need(delta, "--delta"))
    if family == "watrous":
        e = _need(epsilon, "--epsilon")
        watrous(d, e)
        return uuvvf_region(d, e, watrous_delta(d, e))
    if family == "rainbow":
        return rainbow_region(_need(m, "--m"), d, _need(epsilon, "--epsilon"), _need(delta, "--delta"))
    raise UsageError(f"unknown family {family!r}")


def _need(value, flag):
    if value is None:
        raise UsageError(f"missing required flag {flag}")
    return value


def _state(args):
    f = args.family
    if f == "werner":
        return werner(args.d, _need(args.beta, "--beta"))
    if f == "isotropic":
        return isotropic(args.d, _need(args.alpha, "--alpha"))
    if f == "uuvvf":
        return uuvvf(args.d, _need(args.epsilon, "--epsilon"), _need(args.delta, "--delta"))
    if f == "watrous":
        return watrous(args.d, _need(args.epsilon, "--epsilon"))
    if f == "rainbow":
        return rainbow(_need(args.m, "--m"), args.d, _need(args.epsilon, "--epsilon"), _need(args.delta, "--delta"))
    raise UsageError(f"unknown family {f!r}")


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None or env.strip() == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        x = float(x)
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


@contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        try:
            fh = open(path, "w", newline="")
        except OSError as exc:
            raise UsageError(f"cannot open --out {path!r}: {exc}") from None
        with fh:
            yield fh


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _search_cfg(args, seed) -> SearchConfig:
    return SearchConfig(
        n_tests=args.tests, opt_steps=args.opt_steps, seed=seed, optimizer=args.optimizer
    )


# --------------------------------------------------------------------------
# verbs


def _cmd_classify(args, seed, out):
    v = classify_state(args.family, args.d, beta=args.beta, alpha=args.alpha,
                       epsilon=args.epsilon, delta=args.delta, m=args.m)
    w = _writer(out)
    w.writerow(["label", "certificate", "value"])
    for name, val in v.certificates:
        w.writerow([str(v.label), name, _fmt(val)])
    print(f"label: {v.label}", file=sys.stderr)


def _frange(lo: Fraction, hi: Fraction, step: Fraction):
    n = int((hi - lo) / step)
    return [lo + k * step for k in range(n + 1)]


def _cmd_region_sweep(args, seed, out):
    w = _writer(out)
    counts: dict[str, int] = {}

    def emit(row, label):
        w.writerow([_fmt(x) for x in row] + [str(label)])
        counts[str(label)] = counts.get(str(label), 0) + 1

    f = args.family
    if args.line is not None:
        if f != "rainbow" or args.line != "top":
            raise UsageError("--line top is only available for --family rainbow")
        m = _need(args.m, "--m")
        rainbow(m, args.d, 0.0, 0.0)  # validates m and d
        lo, hi = rainbow_top_line(m, args.d)
        w.writerow(["epsilon", "delta", "label"])
        for e in np.linspace(lo, hi, args.points):
            dl = rainbow_top_delta(m, args.d, e)
            emit((e, dl), rainbow_region(m, args.d, e, dl).label)
    else:
        step = Fraction(args.grid).limit_denominator(10**9)
        if step <= 0:
            raise UsageError("--grid must be positive")
        lo = Fraction(args.lo).limit_denominator(10**9)
        hi = Fraction(args.hi).limit_denominator(10**9)
        axis = _frange(lo, hi, step)
        if f in ("uuvvf", "rainbow"):
            if f == "rainbow":
                _need(args.m, "--m")
            w.writerow(["epsilon", "delta", "label"])
            for e in axis:
                for dl in axis:
                    try:
                        if f == "uuvvf":
                            label = uuvvf_region(args.d, e, dl).label
                        else:
                            label = rainbow_region(args.m, args.d, float(e), float(dl)).label
                    except InvalidParameters:
                        continue
                    emit((e, dl), label)
        else:
            name = {"werner": "beta", "isotropic": "alpha", "watrous": "epsilon"}[f]
            w.writerow([name, "label"])
            for x in axis:
                try:
                    label = classify_state(f, args.d, **{name: float(x)}).label
                except InvalidParameters:
                    continue
                emit((x,), label)
    summary = ", ".join(f"{k}={v}" for k, v in counts.items())
    print(f"points: {sum(counts.values())} ({summary})", file=sys.stderr)


def _cmd_peasant(args, seed, out):
    cfg = _search_cfg(args, seed)
    if args.family is None:
        if args.n_copies != 1:
            raise UsageError("--n-copies 2 needs a --family state")
        res = random_search(random_density(args.d, args.d, derive_rng(seed, "cli-state")), cfg)
    else:
        res = n_copy_search(_state(args), args.n_copies, cfg)
    w = _writer(out)
    w.writerow(["detected", "first_hit", "best_value", "tests_run", "opt_steps_run"])
    w.writerow([int(res.detected), "" if res.first_hit_index is None else res.first_hit_index,
                _fmt(res.best_value), res.tests_run, res.opt_steps_run])
    print(f"detected: {res.detected}  best value: {res.best_value:.6g}", file=sys.stderr)


def _cmd_protocol(args, seed, out):
    tr = iterate_protocol(_state(args), max_iters=args.max_iters)
    w = _writer(out)
    w.writerow(["round", "epsilon", "delta"])
    for k, (e, dl) in enumerate(tr.steps):
        w.writerow([k, _fmt(e), _fmt(dl)])
    print(f"verdict: {tr.verdict}", file=sys.stderr)


def _cmd_volume(args, seed, out):
    if args.config is not None:
        try:
            cfg = load_config(args.config)
        except (OSError, ValueError, TypeError) as exc:
            raise UsageError(f"bad --config {args.config!r}: {exc}") from None
        if args.seed is not None or os.environ.get(SEED_ENV):
            cfg = replace(cfg, master_seed=seed)
    else:
        dims = tuple(args.dims) if args.dims else (args.d,)
        cfg = VolumeConfig(
            dims=dims,
            samples_per_dim=args.samples,
            search=SearchConfig(n_tests=args.tests, opt_steps=args.opt_steps, optimizer=args.optimizer),
            master_seed=seed,
            output_path=args.records,
            opt_steps_per_d=args.opt_steps_per_d,
        )
    print(f"volume config: {cfg}", file=sys.stderr)
    records = run_volume(cfg, workers=args.workers)
    w = _writer(out)
    w.writerow(["d", "n_samples", "frac_npt", "frac_npt_undetected", "frac_all_undetected",
                "frac_npt_first_hit", "se_frac_npt", "se_npt_undetected", "se_all_undetected",
                "se_npt_first_hit"])
    for d, s in summarize(records).items():
        w.writerow([d, s.n_samples] + [_fmt(x) for x in (
            s.frac_npt, s.frac_npt_undetected, s.frac_all_undetected, s.frac_npt_first_hit,
            s.se_frac_npt, s.se_npt_undetected, s.se_all_undetected, s.se_npt_first_hit)])


def _cmd_curve(args, seed, out):
    rng = derive_rng(seed, "curve-states", args.d)
    states = []
    for _ in range(args.samples):
        rho = random_density(args.d, args.d, rng)
        if not is_ppt(rho):
            states.append(rho)
    if not states:
        raise UsageError("no NPT states drawn; increase --samples")
    curve = detection_curve(states, SearchConfig(n_tests=args.tests, seed=seed))
    w = _writer(out)
    w.writerow(["test_index", "cumulative_detected"])
    for k, c in enumerate(curve, start=1):
        w.writerow([k, _fmt(c)])
    print(f"NPT states: {len(states)} of {args.samples}", file=sys.stderr)


VERBS = {
    "classify": _cmd_classify,
    "region-sweep": _cmd_region_sweep,
    "peasant": _cmd_peasant,
    "protocol": _cmd_protocol,
    "volume": _cmd_volume,
    "curve": _cmd_curve,
}


# --------------------------------------------------------------------------
# parser


def _common(p):
    p.add_argument("--seed", type=int, default=None, help=f"master seed (default ${SEED_ENV} or 0)")
    p.add_argument("--out", default=None, help="write CSV here instead of stdout")
    p.add_argument("--d", type=int, default=3, help="local dimension")


def _family(p, required):
    p.add_argument("--family", choices=FAMILIES, required=required)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--m", type=int)


def _search(p, tests=200, opt_steps=0):
    p.add_argument("--tests", type=int, default=tests, help="random candidate pairs")
    p.add_argument("--opt-steps", type=int, default=opt_steps, help="local optimisation steps")
    p.add_argument("--optimizer", choices=("hill", "seesaw"), default="hill")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="distilkit", description="Distillability classification and search.")
    parser.add_argument("--version", action="version", version=f"distilkit {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("classify", help="region label and certificates for one state")
    _common(p)
    _family(p, True)

    p = sub.add_parser("region-sweep", help="labels over a parameter grid or boundary line")
    _common(p)
    _family(p, True)
    p.add_argument("--grid", type=str, default="0.05", help="grid step")
    p.add_argument("--lo", type=str, default="-0.5", help="lower grid limit")
    p.add_argument("--hi", type=str, default="0.5", help="upper grid limit")
    p.add_argument("--line", choices=("top",), default=None, help="sweep a boundary line instead")
    p.add_argument("--points", type=int, default=201, help="points along --line")

    p = sub.add_parser("peasant", help="Schmidt-rank-two search on a family state or random state")
    _common(p)
    _family(p, False)
    _search(p)
    p.add_argument("--n-copies", type=int, choices=(1, 2), default=1)

    p = sub.add_parser("protocol", help="iterate the two-copy recursion")
    _common(p)
    _family(p, True)
    p.add_argument("--max-iters", type=int, default=64)

    p = sub.add_parser("volume", help="Monte Carlo volume survey")
    _common(p)
    _search(p)
    p.add_argument("--config", default=None, help="JSON file mirroring VolumeConfig")
    p.add_argument("--dims", type=int, nargs="+", default=None, help="dimensions (default --d)")
    p.add_argument("--samples", type=int, default=2000, help="samples per dimension")
    p.add_argument("--opt-steps-per-d", type=int, default=50, help="optimisation steps per unit of d")
    p.add_argument("--records", default="volume.csv", help="per-sample record CSV (resumable)")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("curve", help="cumulative first-detection curve over random NPT states")
    _common(p)
    p.add_argument("--tests", type=int, default=200)
    p.add_argument("--samples", type=int, default=1000)
    return parser


def run_command(argv=None) -> int:
    """Parse ``argv`` and run one verb; returns the exit status."""
    try:
        args = build_parser().parse_args(argv)
        seed = _resolve_seed(args)
        params = {k: v for k, v in sorted(vars(args).items()) if k not in ("seed",)}
        print(f"# seed={seed} " + " ".join(f"{k}={v}" for k, v in params.items()), file=sys.stderr)
        with _output(args.out) as out:
            VERBS[args.verb](args, seed, out)
        return 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvalidParameters as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> None:
    sys.exit(run_command(argv))


if __name__ == "__main__":
    main()
