"""Command-line frontend writing CSV to stdout or a file.

Every subcommand accepts ``--config FILE`` holding a JSON object whose keys
are the flag names (dashes or underscores); flags given on the command line
override the file.  Exit codes: 0 on success, 2 for invalid parameters, 3
for numerical failures.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidParams, NumericalFailure
from .hfun import green_h_form, stable_density
from .mlf_core import MLParams, ml_array, prabhakar
from .oracle_fd import GridSpec, solve_fd
from .series_sd import kernel_params, sd_eval
from .solvers import (PATHS, DataDescriptor, ProblemSpec, SourceDescriptor, TimeOperator, solve_t1,
                      solve_t2)
from .symbols import parse_terms, psi
from .transforms import QuadratureConfig, fourier_inverse


# {{{ parsing helpers


def parse_complex(text: str) -> complex:
    try:
        return complex(str(text).replace(" ", ""))
    except ValueError:
        raise InvalidParams(f"not a number: {text!r}") from None


def parse_list(text) -> list[complex]:
    if isinstance(text, (list, tuple)):
        return [parse_complex(v) for v in text]
    return [parse_complex(v) for v in str(text).split(",") if v.strip()]


def parse_xgrid(text: str) -> np.ndarray:
    """``a:b:n`` gives n equispaced points from a to b."""
    parts = str(text).split(":")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except (ValueError, IndexError):
        raise InvalidParams(f"xgrid must look like a:b:n, got {text!r}") from None
    if len(parts) != 3 or n < 2 or not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise InvalidParams(f"xgrid must look like a:b:n with a < b and n >= 2, got {text!r}")
    return np.linspace(a, b, n)


def _load_table(path: str) -> np.ndarray:
    try:
        try:
            table = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
        except ValueError:
            table = np.loadtxt(path, delimiter=",", comments="#", ndmin=2, skiprows=1)
    except OSError as exc:
        raise InvalidParams(f"cannot read {path!r}: {exc.strerror}") from None
    except ValueError:
        raise InvalidParams(f"{path!r} is not a numeric CSV table") from None
    if table.shape[1] < 2:
        raise InvalidParams(f"{path!r} needs columns x,value")
    return table


def parse_data(text: str, role: str) -> DataDescriptor:
    """``dirac``, ``zero``, ``gaussian:center:width`` or ``tabulated:path``."""
    kind, _, rest = str(text).partition(":")
    if kind in ("dirac", "zero") and not rest:
        return DataDescriptor(kind, role)
    if kind == "gaussian":
        try:
            c, w = (float(v) for v in rest.split(":"))
        except ValueError:
            raise InvalidParams(f"gaussian data must look like gaussian:center:width, got {text!r}") from None
        return DataDescriptor("gaussian", role, center=c, width=w)
    if kind == "tabulated" and rest:
        table = _load_table(rest)
        return DataDescriptor("tabulated", role, x=table[:, 0], values=table[:, 1])
    raise InvalidParams(f"bad data {text!r}; expected dirac, zero, gaussian:c:w or tabulated:path")


def parse_time_factor(text: str) -> Callable[[float], float]:
    """``const``, ``exp:r`` (e^(r t)) or ``cos:w`` (cos(w t))."""
    kind, _, rest = str(text).partition(":")
    if kind == "const" and not rest:
        return lambda t: 1.0
    try:
        rate = float(rest)
    except ValueError:
        raise InvalidParams(f"bad source time factor {text!r}; expected const, exp:r or cos:w") from None
    if kind == "exp":
        return lambda t: math.exp(rate * t)
    if kind == "cos":
        return lambda t: math.cos(rate * t)
    raise InvalidParams(f"bad source time factor {text!r}; expected const, exp:r or cos:w")


def parse_source(args) -> SourceDescriptor:
    if args.source in (None, "zero"):
        return SourceDescriptor()
    return SourceDescriptor("separable", space=parse_data(args.source, "f"),
                            time=parse_time_factor(args.source_time or "const"))


# }}}


# {{{ output


def fmt(v) -> str:
    return format(float(v), ".17g")


class Table:
    def __init__(self, columns: Sequence[str]):
        self.columns = list(columns)
        self.rows: list[list[str]] = []
        self.notes: list[str] = []

    def add(self, *values) -> None:
        self.rows.append([v if isinstance(v, str) else fmt(v) for v in values])

    def note(self, key: str, value) -> None:
        if isinstance(value, (float, np.floating)):
            value = fmt(value)
        self.notes.append(f"# {key}={value}")

    def render(self) -> str:
        lines = [",".join(self.columns)] + [",".join(r) for r in self.rows] + self.notes
        return "\n".join(lines) + "\n"


# }}}


# {{{ commands


def cmd_ml(args) -> Table:
    out = Table(["alpha", "beta", "z_re", "z_im", "value_re", "value_im", "est_error"])
    p = MLParams(args.alpha, args.beta)
    for z in parse_list(args.z):
        r = prabhakar(p, z, args.tol)
        out.add(p.alpha, p.beta, z.real, z.imag, r.value.real, r.value.imag, r.est_error)
    return out


def cmd_prabhakar(args) -> Table:
    out = Table(["alpha", "beta", "gamma", "z_re", "z_im", "value_re", "value_im", "est_error"])
    p = MLParams(args.alpha, args.beta, args.gamma)
    for z in parse_list(args.z):
        r = prabhakar(p, z, args.tol)
        out.add(p.alpha, p.beta, p.gamma_index, z.real, z.imag, r.value.real, r.value.imag, r.est_error)
    return out


def cmd_symbol(args) -> Table:
    k = np.array([v.real for v in parse_list(args.k)])
    values = psi(args.gamma, args.theta, k)
    out = Table(["k", "psi_re", "psi_im"])
    for kk, v in zip(k, values):
        out.add(kk, v.real, v.imag)
    return out


def _single_spec(args, data: tuple[DataDescriptor, ...]) -> ProblemSpec:
    return ProblemSpec(TimeOperator(args.alpha), parse_terms(args.terms), data, parse_source(args))


def _field_table(field) -> Table:
    out = Table(["x", "value"])
    for x, v in zip(field.x_grid, field.values):
        out.add(x, v)
    for key in sorted(field.diagnostics):
        v = field.diagnostics[key]
        if isinstance(v, (int, float, str, np.floating, np.integer)):
            out.note(key, v)
    return out


def _fundamental(alpha: float) -> tuple[DataDescriptor, ...]:
    data = (DataDescriptor("dirac", "f"),)
    return data + ((DataDescriptor("zero", "g"),) if alpha > 1 else ())


def cmd_green(args) -> Table:
    x = parse_xgrid(args.xgrid)
    if args.route == "fourier":
        spec = ProblemSpec(TimeOperator(args.alpha), parse_terms(args.terms), _fundamental(args.alpha))
        return _field_table(solve_t1(spec, x, args.t))
    op = parse_terms(args.terms)
    if len(op.terms) != 1:
        raise InvalidParams("the H-function route needs a single space term")
    term = op.terms[0]
    out = Table(["x", "value"])
    for xi in x:
        out.add(xi, green_h_form(xi, args.t, args.alpha, term.gamma_order, term.theta, term.mu))
    return out


def cmd_solve1(args) -> Table:
    data = [parse_data(args.data, "f")]
    if args.g_data is not None:
        data.append(parse_data(args.g_data, "g"))
    elif args.alpha > 1:
        data.append(DataDescriptor("zero", "g"))
    return _field_table(solve_t1(_single_spec(args, tuple(data)), parse_xgrid(args.xgrid), args.t))


def cmd_solve2(args) -> Table:
    data = tuple(parse_data(getattr(args, role), role) for role in ("f1", "g1", "f2", "g2")
                 if getattr(args, role) is not None)
    spec = ProblemSpec(TimeOperator(args.alpha, args.beta, args.a), parse_terms(args.terms), data,
                       parse_source(args))
    return _field_table(solve_t2(spec, parse_xgrid(args.xgrid), args.t, path=args.path))


def cmd_hcheck(args) -> Table:
    xs = parse_xgrid(args.xgrid)
    out = Table(["x", "h_form", "fourier", "abs_err", "rel_err"])
    if args.alpha == 1.0:
        h = [stable_density(x, args.t, args.gamma, args.theta, args.mu) for x in xs]
    else:
        h = [green_h_form(x, args.t, args.alpha, args.gamma, args.theta, args.mu) for x in xs]
    spec = lambda k: ml_array(args.alpha, args.alpha, -args.mu * psi(args.gamma, args.theta, k) * args.t**args.alpha)[0]
    ref = args.t ** (args.alpha - 1) * fourier_inverse(spec, xs, QuadratureConfig(tail_tol=args.tail_tol)).real
    worst = 0.0
    for x, a, b in zip(xs, h, ref):
        err = abs(a - b)
        rel = err / abs(b) if b != 0 else math.inf
        worst = max(worst, rel)
        out.add(x, a, b, err, rel)
    out.note("max_rel_err", worst)
    return out


def cmd_oracle_compare(args) -> Table:
    from .acceptance import fd_comparison

    op = parse_terms(args.terms)
    two = args.beta is not None
    top = TimeOperator(args.alpha, args.beta, args.a)
    grid = GridSpec(args.x_min, args.x_max, args.nx, args.nt, args.t)
    if args.data == "dirac":
        ref, fd, _, _ = fd_comparison(lambda d: ProblemSpec(top, op, (d,)), grid, two)
    else:
        spec = ProblemSpec(top, op, (parse_data(args.data, "f1" if two else "f"),))
        fd = solve_fd(spec, grid)
        ref = (solve_t2 if two else solve_t1)(spec, fd.x_grid, args.t).values
    out = Table(["x", "analytic", "fd", "abs_err"])
    err = np.abs(fd.values - ref)
    for row in zip(fd.x_grid, ref, fd.values, err):
        out.add(*row)
    out.note("max_abs_err", float(err.max()))
    for key in ("est_error", "sigma", "h", "tau"):
        out.note(key, float(fd.diagnostics[key]))
    return out


def cmd_sd_eval(args) -> Table:
    p = kernel_params(args.alpha, args.beta, args.rho)
    x, y = parse_complex(args.x), parse_complex(args.y)
    r = sd_eval(p, x, y, args.tol)
    out = Table(["x_re", "x_im", "y_re", "y_im", "value_re", "value_im", "est_error", "terms"])
    out.add(x.real, x.imag, y.real, y.imag, r.value.real, r.value.imag, r.est_error, str(r.terms_used))
    return out


def cmd_acceptance(args) -> Table:
    from . import acceptance

    wanted = {int(v.real) for v in parse_list(args.only)} if args.only else None
    out = Table(["criterion", "passed", "seconds", "limit", "detail"])
    for number, check in enumerate(acceptance.CRITERIA, start=1):
        if wanted is None or number in wanted:
            r = check()
            out.add(str(r.number), str(r.passed).lower(), r.seconds, r.limit, '"' + r.detail.replace('"', "'") + '"')
    return out


# }}}


# {{{ argument parser

# (flag, type, default, help); None default means required unless listed as optional
COMMANDS: dict[str, tuple[Callable, list, str]] = {
    "ml": (cmd_ml, [("alpha", float, None, ""), ("beta", float, None, ""),
                    ("z", str, None, "comma-separated complex arguments"), ("tol", float, 1e-12, "")],
           "two-parameter Mittag-Leffler function"),
    "prabhakar": (cmd_prabhakar, [("alpha", float, None, ""), ("beta", float, None, ""),
                                  ("gamma", float, None, "Prabhakar index"), ("z", str, None, ""),
                                  ("tol", float, 1e-12, "")],
                  "three-parameter Mittag-Leffler function"),
    "symbol": (cmd_symbol, [("gamma", float, None, ""), ("theta", float, 0.0, ""),
                            ("k", str, None, "comma-separated wavenumbers")],
               "Riesz-Feller symbol psi(k)"),
    "green": (cmd_green, [("alpha", float, None, ""), ("terms", str, None, "mu:gamma:theta[,...]"),
                          ("t", float, None, ""), ("xgrid", str, None, "a:b:n"),
                          ("route", str, "fourier", "fourier or h")],
              "fundamental solution of the single-term problem"),
    "solve1": (cmd_solve1, [("alpha", float, None, ""), ("terms", str, None, "mu:gamma:theta[,...]"),
                            ("data", str, "dirac", "dirac|zero|gaussian:c:w|tabulated:path"),
                            ("g-data", str, "", "second datum (alpha > 1)"),
                            ("source", str, "zero", "source space profile"),
                            ("source-time", str, "const", "const|exp:r|cos:w"),
                            ("t", float, None, ""), ("xgrid", str, None, "a:b:n")],
               "single time derivative"),
    "solve2": (cmd_solve2, [("alpha", float, None, ""), ("beta", float, None, ""), ("a", float, None, ""),
                            ("terms", str, None, "mu:gamma:theta[,...]"),
                            ("f1", str, "dirac", ""), ("g1", str, "", ""), ("f2", str, "", ""),
                            ("g2", str, "", ""),
                            ("source", str, "zero", ""), ("source-time", str, "const", ""),
                            ("t", float, None, ""), ("xgrid", str, None, "a:b:n"),
                            ("path", str, "prabhakar_series", "|".join(PATHS))],
               "two-term time operator"),
    "hcheck": (cmd_hcheck, [("alpha", float, None, ""), ("gamma", float, None, ""), ("theta", float, 0.0, ""),
                            ("mu", float, 1.0, ""), ("t", float, 1.0, ""), ("xgrid", str, "0.1:4:40", "a:b:n"),
                            ("tail-tol", float, 1e-12, "")],
               "H-function form against Fourier inversion"),
    "oracle-compare": (cmd_oracle_compare, [("alpha", float, None, ""), ("beta", float, "", ""),
                                            ("a", float, "", ""), ("terms", str, None, ""),
                                            ("data", str, "dirac", ""), ("t", float, None, ""),
                                            ("nx", int, None, ""), ("nt", int, None, ""),
                                            ("x-min", float, -20.0, ""), ("x-max", float, 20.0, "")],
                       "finite-difference oracle against the analytic solution"),
    "sd-eval": (cmd_sd_eval, [("alpha", float, None, ""), ("beta", float, None, ""), ("rho", float, None, ""),
                              ("x", str, None, "complex"), ("y", str, None, "complex"), ("tol", float, 1e-12, "")],
                "double series of the two-term kernel"),
    "acceptance": (cmd_acceptance, [("only", str, "", "comma-separated criterion numbers")],
                   "run the acceptance checks"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracrd", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)
    for name, (_, flags, helptext) in COMMANDS.items():
        sp = subs.add_parser(name, help=helptext)
        sp.add_argument("--config", help="JSON file with default flag values")
        sp.add_argument("--output", "-o", help="write CSV here instead of stdout")
        for flag, _, default, text in flags:
            # the empty-string default marks optional flags without a value
            sp.add_argument(f"--{flag}", default=None, help=text or None)
    return parser


def resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Merge config-file values under the flags, apply defaults and convert types."""
    _, flags, _ = COMMANDS[args.command]
    config = {}
    if args.config:
        try:
            with open(args.config) as fh:
                config = json.load(fh)
        except OSError as exc:
            raise InvalidParams(f"cannot read config {args.config!r}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise InvalidParams(f"config {args.config!r} is not valid JSON: {exc.msg}") from None
        if not isinstance(config, dict):
            raise InvalidParams("config must hold a JSON object")
        config = {k.replace("-", "_"): v for k, v in config.items()}
    if args.output is None and "output" in config:
        args.output = config.pop("output")
    known = {f.replace("-", "_") for f, *_ in flags}
    unknown = sorted(set(config) - known - {"output"})
    if unknown:
        raise InvalidParams(f"unknown config keys for {args.command}: {', '.join(unknown)}")
    for flag, kind, default, _ in flags:
        dest = flag.replace("-", "_")
        raw = getattr(args, dest)
        if raw is None:
            raw = config.get(dest, default)
        if raw is None:
            raise InvalidParams(f"--{flag} is required for {args.command}")
        if raw == "":
            setattr(args, dest, None)
            continue
        try:
            value = kind(raw)
        except (TypeError, ValueError):
            raise InvalidParams(f"--{flag} expects {kind.__name__}, got {raw!r}") from None
        if kind is float and not math.isfinite(value):
            raise InvalidParams(f"--{flag} must be finite, got {raw!r}")
        setattr(args, dest, value)
    if getattr(args, "route", "fourier") not in ("fourier", "h"):
        raise InvalidParams(f"--route must be fourier or h, got {args.route!r}")
    return args


def attach_negative_values(argv: Sequence[str]) -> list[str]:
    """Rewrite ``--flag -5:5:201`` as ``--flag=-5:5:201`` so argparse does not read an option."""
    out: list[str] = []
    for token in argv:
        prev = out[-1] if out else ""
        if (prev.startswith("--") and "=" not in prev and len(token) > 1 and token[0] == "-"
                and (token[1].isdigit() or token[1] == ".")):
            out[-1] = f"{prev}={token}"
        else:
            out.append(token)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    args = build_parser().parse_args(attach_negative_values(argv))
    try:
        args = resolve(args)
        text = COMMANDS[args.command][0](args).render()
    except InvalidParams as exc:
        print(f"error: InvalidParams: {' '.join(str(exc).split())}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"error: {type(exc).__name__}: {' '.join(str(exc).split())}", file=sys.stderr)
        return 3
    if args.output:
        with open(args.output, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
