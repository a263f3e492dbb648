"""Command-line front end: JSON/CSV in and out for every pipeline."""

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from qassist.evolve import propagator_analytic
from qassist.experiment import (
    CURVE_COLUMNS,
    SWEEP_COLUMNS,
    Method,
    NoiseSpec,
    TomographyConfig,
    delta_error_curve,
    sweep_bloch_grid,
    tau_grid,
)
from qassist.model import XyzParams, spectrum
from qassist.optimize import (
    DISORDERED_MODELS,
    PureOptimumSpec,
    delta_max_curve,
    disordered_optimum_params,
    failure_check,
    maximize_delta,
    pure_optimum_params,
)
from qassist.pulsesim import (
    DEFAULT_J12_HZ,
    UnsupportedModel,
    compile_unitary,
    decomposition_timings,
    exact_decomposition_sequence,
    gate_fidelity,
    trotter_sequence,
    trotter_unitary,
)
from qassist.transfer import (
    AssistantState,
    JointProbabilities,
    SingularTransfer,
    abs_delta_analytic,
    reconstruct,
    transfer_matrix,
)

EXIT_OK, EXIT_ARGS, EXIT_SINGULAR, EXIT_IO = 0, 2, 3, 4


class ArgumentError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ArgumentError(f"{self.prog}: {message}")


def _finite(x):
    return x if math.isfinite(x) else None


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return _finite(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    return obj


def _load_json(text):
    """Inline JSON object or path to a JSON file."""
    if text.lstrip().startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ArgumentError(f"malformed inline JSON: {exc}") from exc
    with open(text, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ArgumentError(f"malformed JSON in {text}: {exc}") from exc


def _params(text):
    data = _load_json(text)
    if not isinstance(data, dict):
        raise ArgumentError("params must be a JSON object")
    return XyzParams.from_dict(data)


def _positive(name, x):
    if not (math.isfinite(x) and x > 0):
        raise ArgumentError(f"--{name} must be a positive finite number")
    return x


def _epsilon(x):
    if not 0.0 <= x <= 1.0:
        raise ArgumentError("--epsilon must lie in [0, 1]")
    return x


def _count(name, n, low=1):
    if n < low:
        raise ArgumentError(f"--{name} must be >= {low}")
    return n


def write_atomic(path, text):
    """Write to a temporary sibling and rename, so failures leave nothing behind."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def _emit(args, payload, out=sys.stdout):
    text = json.dumps(_jsonable(payload), indent=2, allow_nan=False) + "\n"
    if getattr(args, "out", None):
        write_atomic(args.out, text)
    else:
        out.write(text)


def cmd_spectrum(args, out):
    p = _params(args.params)
    sp = spectrum(p)
    vectors = [[{"re": float(z.real), "im": float(z.imag)} for z in col] for col in sp.vectors.T]
    _emit(args, {"params": p.to_dict(), "eigenvalues": sp.lambdas, "eigenvectors": vectors}, out)


def cmd_delta(args, out):
    p = _params(args.params)
    tau = _positive("tau", args.tau)
    eps = _epsilon(args.epsilon)
    analytic = abs_delta_analytic(p, tau, eps)
    brute = transfer_matrix(AssistantState(eps), propagator_analytic(p, tau)).abs_delta
    _emit(
        args,
        {"params": p.to_dict(), "tau": tau, "epsilon": eps, "absDelta": analytic,
         "absDeltaBruteForce": brute, "difference": abs(analytic - brute)},
        out,
    )


def cmd_optimize(args, out):
    eps = _epsilon(args.epsilon)
    tau = None if args.tau is None else _positive("tau", args.tau)
    _count("budget", args.budget, 1000)
    res = maximize_delta(eps, tau_fixed=tau, seed=args.seed, budget=args.budget)
    _emit(args, res.to_dict(), out)


def cmd_optimum(args, out):
    if args.model == "pure":
        tau, eps = 1.0, 1.0
        p = pure_optimum_params(PureOptimumSpec(), tau)
    else:
        (p, tau), eps = disordered_optimum_params(args.model), 0.0
    _emit(
        args,
        {"model": args.model, "params": p.to_dict(), "tau": tau, "epsilon": eps,
         "absDelta": abs_delta_analytic(p, tau, eps)},
        out,
    )


def cmd_failure(args, out):
    p = _params(args.params)
    tau = _positive("tau", args.tau)
    eps = _epsilon(args.epsilon)
    _emit(args, failure_check(p, tau, eps).to_dict(), out)


def _realized(p, tau, segments, j12):
    try:
        seq = trotter_sequence(p, tau, segments, j12)
        return compile_unitary(seq), seq
    except UnsupportedModel:
        return trotter_unitary(p, tau, segments), None


def cmd_trotter(args, out):
    if args.model not in DISORDERED_MODELS:
        raise ArgumentError(f"--model must be one of {sorted(DISORDERED_MODELS)}")
    _count("segments", args.segments)
    p, tau = disordered_optimum_params(args.model)
    u_ap, _ = _realized(p, tau, args.segments, args.j12)
    raw, mag = gate_fidelity(propagator_analytic(p, tau).u, u_ap)
    _emit(
        args,
        {"model": args.model, "segments": args.segments, "tau": tau,
         "fidelity": raw, "fidelityMagnitude": mag, "fidelityMagnitudeSquared": mag**2},
        out,
    )


def cmd_pulse(args, out):
    p = _params(args.params)
    tau = _positive("tau", args.tau)
    method = Method.parse(args.method)
    if method.kind == "trotter":
        seq = trotter_sequence(p, tau, method.segments, args.j12)
        extra = {"segments": method.segments}
    elif method.kind == "exact":
        seq = exact_decomposition_sequence(p, tau, args.j12)
        t = decomposition_timings(p, tau, args.j12)
        extra = {"timings": {"tau1": t.tau1, "tau2": t.tau2, "tau3": t.tau3,
                             "beta1": t.beta1, "beta2": t.beta2, "phase": t.phase}}
    else:
        raise ArgumentError("--method must be trotter:<m> or exact")
    raw, mag = gate_fidelity(propagator_analytic(p, tau).u, compile_unitary(seq))
    payload = {"method": str(method), "sequence": seq.dump().splitlines(),
               "nmr": seq.nmr.to_dict(), "fidelity": raw, "fidelityMagnitude": mag, **extra}
    _emit(args, payload, out)


def cmd_reconstruct(args, out):
    data = _load_json(args.probs)
    probs = JointProbabilities.from_dict(data)
    p = _params(args.params)
    tau = _positive("tau", args.tau)
    eps = _epsilon(args.epsilon)
    tm = transfer_matrix(AssistantState(eps), propagator_analytic(p, tau))
    rec = reconstruct(probs.as_array(), tm)
    _emit(args, {"s": rec.s, "nonphysical": rec.nonphysical, "absDelta": tm.abs_delta}, out)


def _r_list(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ArgumentError(f"--r: {exc}") from exc
    if not values or any(not 0.0 <= r <= 1.0 for r in values):
        raise ArgumentError("--r needs comma-separated radii in [0, 1]")
    return values


def cmd_sweep(args, out):
    p = _params(args.params)
    tau = _positive("tau", args.tau)
    eps = _epsilon(args.epsilon)
    config = TomographyConfig(
        params=p, tau=tau, epsilon=eps, method=Method.parse(args.method),
        noise=NoiseSpec.parse(args.noise, seed=args.seed), j12_hz=args.j12,
    )
    radii = _r_list(args.r)
    result = sweep_bloch_grid(config, radii)
    write_atomic(args.out, _csv_text(SWEEP_COLUMNS, (rec.row() for rec in result.records)))
    summary = {"records": len(result.records), "fAv": result.f_av, "dAv": result.d_av,
               "fAvHalf": result.f_av_half, "dAvHalf": result.d_av_half}
    out.write(json.dumps(_jsonable(summary), indent=2) + "\n")


def cmd_curve(args, out):
    p = _params(args.params)
    eps = _epsilon(args.epsilon)
    tau_max = _positive("tau-max", args.tau_max)
    steps = _count("steps", args.steps, 2)
    points = delta_error_curve(p, eps, tau_grid(tau_max, steps))
    rows = ([pt.tau, pt.abs_delta, pt.error_coeff, pt.product, *pt.concurrences] for pt in points)
    write_atomic(args.out, _csv_text(CURVE_COLUMNS, rows))


def cmd_deltamax(args, out):
    steps = _count("steps", args.steps, 2)
    _count("budget", args.budget, 1000)
    eps = np.linspace(0.0, 1.0, steps)
    results = delta_max_curve(eps, seed=args.seed, budget=args.budget)
    rows = ([r.epsilon, r.abs_delta, r.tau] for r in results)
    write_atomic(args.out, _csv_text(["epsilon", "abs_delta_max", "tau"], rows))


def build_parser():
    parser = _Parser(prog="qassist", description="Single-observable qubit tomography toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(func=func)
        sp.add_argument("--seed", type=int, default=0)
        return sp

    sp = add("spectrum", cmd_spectrum, "eigenvalues and eigenvectors")
    sp.add_argument("--params", required=True)
    sp.add_argument("--out")

    sp = add("delta", cmd_delta, "|Delta| with a brute-force cross-check")
    sp.add_argument("--params", required=True)
    sp.add_argument("--tau", type=float, required=True)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--out")

    sp = add("optimize", cmd_optimize, "maximize |Delta|")
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--tau", type=float)
    sp.add_argument("--budget", type=int, default=200_000)
    sp.add_argument("--out")

    sp = add("optimum", cmd_optimum, "closed-form optimal Hamiltonians")
    sp.add_argument("--model", required=True, choices=[*DISORDERED_MODELS, "pure"])
    sp.add_argument("--out")

    sp = add("failure", cmd_failure, "singular-manifold predicates")
    sp.add_argument("--params", required=True)
    sp.add_argument("--tau", type=float, required=True)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--out")

    sp = add("trotter", cmd_trotter, "Trotter gate fidelity")
    sp.add_argument("--model", required=True)
    sp.add_argument("--segments", type=int, required=True)
    sp.add_argument("--j12", type=float, default=DEFAULT_J12_HZ)
    sp.add_argument("--out")

    sp = add("pulse", cmd_pulse, "pulse sequence dump and fidelity")
    sp.add_argument("--params", required=True)
    sp.add_argument("--tau", type=float, required=True)
    sp.add_argument("--method", required=True)
    sp.add_argument("--j12", type=float, default=DEFAULT_J12_HZ)
    sp.add_argument("--out")

    sp = add("reconstruct", cmd_reconstruct, "Bloch vector from joint probabilities")
    sp.add_argument("--probs", required=True)
    sp.add_argument("--params", required=True)
    sp.add_argument("--tau", type=float, required=True)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--out")

    sp = add("sweep", cmd_sweep, "Bloch-grid tomography sweep (CSV)")
    sp.add_argument("--params", required=True)
    sp.add_argument("--tau", type=float, required=True)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--method", default="analytic")
    sp.add_argument("--noise", default="none")
    sp.add_argument("--r", default="1,0.5")
    sp.add_argument("--j12", type=float, default=DEFAULT_J12_HZ)
    sp.add_argument("--out", required=True)

    sp = add("curve", cmd_curve, "|Delta|, E and concurrence versus tau (CSV)")
    sp.add_argument("--params", required=True)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--tau-max", type=float, default=2 * math.pi)
    sp.add_argument("--steps", type=int, default=500)
    sp.add_argument("--out", required=True)

    sp = add("deltamax", cmd_deltamax, "|Delta|max versus epsilon (CSV)")
    sp.add_argument("--steps", type=int, default=11)
    sp.add_argument("--budget", type=int, default=200_000)
    sp.add_argument("--out", required=True)
    return parser


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        args.func(args, out)
    except SingularTransfer as exc:
        err.write(f"error: singular transfer: {exc}\n")
        return EXIT_SINGULAR
    except OSError as exc:
        err.write(f"error: I/O: {exc}\n")
        return EXIT_IO
    except (ArgumentError, ValueError, UnsupportedModel) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_ARGS
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
