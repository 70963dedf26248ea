"""Command-line front end.

Every subcommand prints a JSON object (or CSV with ``--format csv``) on
stdout.  Exit status is 0 on success, 1 on a domain error raised by the
library, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bounds, capacity, protocols, spectra, states
from .errors import SpreadError

# Which subcommand exposes each library operation.
OPERATION_COMMANDS = {
    "spectra.schmidt_spectrum_of": "analyze",
    "spectra.renyi_entropy": "analyze",
    "spectra.entanglement_moments": "analyze",
    "spectra.spread": "analyze",
    "spectra.generalized_spread": "analyze",
    "states.spectrum_of_named": "analyze",
    "spectra.smoothed_spread": "smooth",
    "spectra.smoothed_spread_bruteforce": "smooth",
    "spectra.tensor_product": "product",
    "spectra.tensor_power": "power",
    "states.local_conversion_fidelity": "fidelity",
    "states.embezzle_fidelity": "embezzle",
    "protocols.new_session": "protocol",
    "protocols.step": "protocol",
    "protocols.destroy_ebit_via_cbit": "superpose-demo",
    "protocols.noop_random_bit": "superpose-demo",
    "protocols.run_superposed": "superpose-demo",
    "protocols.concentration_sample": "concentrate",
    "bounds.thm1_lower_bound": "thm1",
    "bounds.dilution_cost_curve": "dilution-curve",
    "bounds.spread_capacity_interval": "capacity-table",
    "bounds.thm2_bound": "thm2",
    "capacity.entangling_power": "entangling-power",
    "capacity.build_uf": "uf",
    "capacity.channel_rates": "rates",
    "capacity.optimize_rates": "optimize",
    "capacity.qrst_region_check": "qrst",
}


@dataclass
class CommandResult:
    subcommand: str | None
    params: dict
    payload: dict = field(default_factory=dict)
    status: int = 0
    error: str | None = None
    fmt: str = "json"


# -- argument helpers -------------------------------------------------------


def load_spectrum(text: str) -> spectra.SchmidtSpectrum:
    """A named state (``partial:0.25``) or a JSON file holding a spectrum or a state."""
    if text.endswith(".json"):
        data = json.loads(Path(text).read_text())
        if "classes" in data:
            return spectra.SchmidtSpectrum.from_dict(data)
        return spectra.schmidt_spectrum_of(spectra.BipartiteState.from_dict(data))
    return states.spectrum_of_named(text)


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _pair(text: str) -> tuple[int, int]:
    a, b = _int_list(text)
    return a, b


def _table(text: str) -> np.ndarray:
    return np.array([[int(x) for x in row.split(",")] for row in text.split(";")])


def _load_channel(text: str) -> capacity.QuantumChannel:
    return capacity.channel_from_spec(text)


def _load_gate(text: str) -> capacity.BipartiteUnitary:
    if text.endswith(".json"):
        return capacity.gate_from_dict(json.loads(Path(text).read_text()))
    return capacity.gate_from_name(text)


def _load_rho(text: str, d: int) -> np.ndarray:
    """``maximally-mixed``, ``diag:p0,p1,...``, ``bloch:x,y,z`` or a JSON file with re/im."""
    if text == "maximally-mixed":
        return np.eye(d) / d
    kind, _, arg = text.partition(":")
    if kind == "diag":
        return np.diag([float(x) for x in arg.split(",")]).astype(complex)
    if kind == "bloch":
        x, y, z = (float(v) for v in arg.split(","))
        return 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]])
    if text.endswith(".json"):
        data = json.loads(Path(text).read_text())
        return np.asarray(data["rho_re"]) + 1j * np.asarray(data.get("rho_im", 0))
    raise argparse.ArgumentTypeError(f"cannot parse density matrix {text!r}")


def _round(obj, digits: int):
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(f"{x:.{digits}g}")
    if isinstance(obj, complex):
        return [_round(obj.real, digits), _round(obj.imag, digits)]
    if isinstance(obj, dict):
        return {str(k): _round(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_round(v, digits) for v in obj]
    return obj


def _spectrum_payload(spec: spectra.SchmidtSpectrum, limit: int = 64) -> dict:
    rows = spec.to_dict()["classes"]
    out = {"num_classes": spec.num_classes, "rank": spec.rank, "classes": rows[:limit]}
    if len(rows) > limit:
        out["truncated"] = True
    return out


# -- subcommands -------------------------------------------------------------


def cmd_analyze(args):
    spec = load_spectrum(args.state)
    renyi = {str(a): spectra.renyi_entropy(spec, a) for a in (0, 0.5, 1, 2)}
    renyi["inf"] = spectra.renyi_entropy(spec, math.inf)
    mean, sigma = spectra.entanglement_moments(spec)
    out = {
        "spectrum": _spectrum_payload(spec),
        "renyi": renyi,
        "entropy": mean,
        "sigma": sigma,
        "spread": spectra.spread(spec),
    }
    if args.alpha is not None or args.beta is not None:
        alpha = 0.0 if args.alpha is None else args.alpha
        beta = math.inf if args.beta is None else args.beta
        out["generalized_spread"] = {"alpha": alpha, "beta": beta, "value": spectra.generalized_spread(spec, alpha, beta)}
    return out


def cmd_smooth(args):
    spec = load_spectrum(args.state)
    out = {"eps": args.eps, "spread": spectra.spread(spec), "smoothed_spread": spectra.smoothed_spread(spec, args.eps)}
    if args.bruteforce:
        out["bruteforce"] = spectra.smoothed_spread_bruteforce(spec, args.eps)
    return out


def cmd_product(args):
    a, b = load_spectrum(args.state), load_spectrum(args.other)
    prod = spectra.tensor_product(a, b)
    return {
        "spectrum": _spectrum_payload(prod),
        "spread": spectra.spread(prod),
        "spread_sum": spectra.spread(a) + spectra.spread(b),
    }


def cmd_power(args):
    base = load_spectrum(args.state)
    rows = []
    for n in args.n:
        spec = spectra.tensor_power(base, n)
        sm = spectra.smoothed_spread(spec, args.eps)
        rows.append([n, math.sqrt(n), spec.num_classes, spectra.spread(spec), sm, sm / math.sqrt(n)])
    return {"columns": ["n", "sqrt_n", "classes", "spread", "smoothed_spread", "ratio"], "rows": rows, "eps": args.eps}


def cmd_dilution(args):
    curve = bounds.dilution_cost_curve(args.p, args.eps, args.n)
    rows = [[n, math.sqrt(n), b] for n, b in curve]
    return {"columns": ["n", "sqrt_n", "bound"], "rows": rows, "p": args.p, "eps": args.eps,
            "delta": bounds.smoothing_delta(args.eps)}


def cmd_thm1(args):
    rep = bounds.thm1_lower_bound(load_spectrum(args.source), load_spectrum(args.target), args.eps)
    return {"bound": rep.bound_value, "delta": rep.delta, "eps": rep.eps}


def cmd_thm2(args):
    return {"E_U": args.e_u, "E_Udag": args.e_udag, "min_qubits": bounds.thm2_bound(args.e_u, args.e_udag)}


def cmd_capacity_table(args):
    rows = bounds.capacity_table(p=args.p, n=args.n, eps=args.eps, embezzler_n=args.embezzler_n,
                                 E=args.e_u, E_dagger=args.e_udag)
    for r in rows:
        r["interval"] = [r["min"], r["max"]]
    return {"table": rows, "columns": ["resource", "min", "max"],
            "rows": [[r["resource"], r["min"], r["max"]] for r in rows]}


def cmd_fidelity(args):
    return {"fidelity": states.local_conversion_fidelity(load_spectrum(args.source), load_spectrum(args.target))}


def cmd_embezzle(args):
    target = load_spectrum(args.state)
    rows = []
    for n in args.n:
        f = states.embezzle_fidelity(n, target)
        rows.append([n, f, 1.0 - f])
    return {"columns": ["n", "fidelity", "error"], "rows": rows, "target": args.state}


def cmd_entangling_power(args):
    gate = _load_gate(args.gate)
    res = capacity.entangling_power(gate, args.ancilla, restarts=args.restarts, rng_seed=args.seed,
                                    return_details=True)
    return {"gate": args.gate, "value": res.value, "upper_bound": capacity.entangling_power_bound(gate),
            "restarts": args.restarts}


def cmd_uf(args):
    u = capacity.build_uf(_table(args.table))
    return {"dims": list(u.dims), "diagonal": np.real(np.diag(u.matrix)).tolist(),
            "operator_schmidt_rank": u.operator_schmidt_rank()}


def cmd_rates(args):
    ch = _load_channel(args.channel)
    i_ab, s_b = capacity.channel_rates(ch, _load_rho(args.rho, ch.d_in))
    return {"I_AB": i_ab, "S_B": s_b}


def cmd_optimize(args):
    ch = _load_channel(args.channel)
    val, rho = capacity.optimize_rates(ch, args.objective, c1=args.c1, restarts=args.restarts,
                                       rng_seed=args.seed, grid=not args.no_grid)
    return {"objective": args.objective, "value": val, "rho_re": rho.real.tolist(), "rho_im": rho.imag.tolist()}


def cmd_qrst(args):
    ch = _load_channel(args.channel)
    rep = capacity.qrst_region_check(ch, capacity.RateTriple(args.c1, args.c2, args.e),
                                     restarts=args.restarts, rng_seed=args.seed)
    return {"feasible": rep.feasible, "slacks": rep.slacks, "max_I": rep.max_I, "max_SB": rep.max_SB,
            "min_term": rep.min_term}


def cmd_superpose(args):
    res = protocols.dirty_demo() if args.variant == "dirty" else protocols.clean_demo()
    return {
        "variant": args.variant,
        "fidelity": res.fidelity,
        "residual_trace_distance": res.residual_distance,
        "layout": res.layout,
        "ledgers": [s.ledger.as_dict() for s in res.sessions],
    }


def cmd_protocol(args):
    data = json.loads(Path(args.program).read_text())
    initial, steps = protocols.program_from_json(data)
    sess = protocols.new_session(initial)
    for act in steps:
        protocols.step(sess, act)
    spec, fid = protocols.payload_state(sess)
    out = sess.snapshot()
    out["payload_spectrum"] = _spectrum_payload(spec)
    out["payload_fidelity"] = fid
    return out


def cmd_concentrate(args):
    mean, samples = protocols.concentration_sample(args.p, args.n, args.trials, args.seed, floor=args.floor)
    h = -args.p * math.log2(args.p) - (1 - args.p) * math.log2(1 - args.p)
    return {"mean_yield": mean, "yield_per_copy": mean / args.n, "entropy": h, "std": float(np.std(samples)),
            "trials": args.trials}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--precision", type=int, default=6)
    common.add_argument("--seed", type=int, default=0)

    parser = argparse.ArgumentParser(prog="entspread", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    p = add("analyze", cmd_analyze, "entropies, spread and moments of a state")
    p.add_argument("--state", required=True)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)

    p = add("smooth", cmd_smooth, "eps-smoothed spread")
    p.add_argument("--state", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--bruteforce", action="store_true")

    p = add("product", cmd_product, "spectrum of a tensor product")
    p.add_argument("--state", required=True)
    p.add_argument("--with", dest="other", required=True)

    p = add("power", cmd_power, "smoothed spread of tensor powers")
    p.add_argument("--state", required=True)
    p.add_argument("--n", type=_int_list, required=True)
    p.add_argument("--eps", type=float, default=0.01)

    p = add("dilution-curve", cmd_dilution, "communication lower bound for dilution")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--n", type=_int_list, required=True)

    p = add("thm1", cmd_thm1, "spread lower bound on communication")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--eps", type=float, default=0.0)

    p = add("thm2", cmd_thm2, "qubit lower bound for simulating a gate")
    p.add_argument("--e-u", type=float, required=True)
    p.add_argument("--e-udag", type=float, required=True)

    p = add("capacity-table", cmd_capacity_table, "spread capacity intervals")
    p.add_argument("--p", type=float, default=0.1)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--embezzler-n", type=int, default=16)
    p.add_argument("--e-u", type=float, default=1.0)
    p.add_argument("--e-udag", type=float, default=1.0)

    p = add("fidelity", cmd_fidelity, "best local-unitary overlap of two states")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)

    p = add("embezzle", cmd_embezzle, "embezzlement fidelity")
    p.add_argument("--n", type=_int_list, required=True)
    p.add_argument("--state", default="ebits:1")

    p = add("entangling-power", cmd_entangling_power, "single-use entangling power of a gate")
    p.add_argument("--gate", required=True)
    p.add_argument("--ancilla", type=_pair, default=(2, 2))
    p.add_argument("--restarts", type=int, default=32)

    p = add("uf", cmd_uf, "diagonal phase gate of a Boolean function")
    p.add_argument("--table", required=True, help='rows separated by ";", e.g. "1,0;0,1"')

    p = add("rates", cmd_rates, "I(A;B) and S(B) for one input")
    p.add_argument("--channel", required=True)
    p.add_argument("--rho", default="maximally-mixed")

    p = add("optimize", cmd_optimize, "optimize a rate quantity over inputs")
    p.add_argument("--channel", required=True)
    p.add_argument("--objective", choices=capacity.OBJECTIVES, default="max_I")
    p.add_argument("--c1", type=float)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--no-grid", action="store_true")

    p = add("qrst", cmd_qrst, "check a rate triple against the feedback-simulation region")
    p.add_argument("--channel", required=True)
    p.add_argument("--c1", type=float, required=True)
    p.add_argument("--c2", type=float, required=True)
    p.add_argument("--e", type=float, required=True)
    p.add_argument("--restarts", type=int, default=8)

    p = add("superpose-demo", cmd_superpose, "run the clean or dirty superposition demo")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--clean", dest="variant", action="store_const", const="clean", default="clean")
    g.add_argument("--dirty", dest="variant", action="store_const", const="dirty")

    p = add("protocol", cmd_protocol, "run a JSON protocol program")
    p.add_argument("--program", required=True)

    p = add("concentrate", cmd_concentrate, "Monte Carlo entanglement concentration")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--floor", action="store_true")

    return parser


def format_payload(result: CommandResult, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        payload = result.payload
        if "rows" in payload and "columns" in payload:
            writer.writerow(payload["columns"])
            writer.writerows(payload["rows"])
        else:
            writer.writerow(["key", "value"])
            for k, v in payload.items():
                writer.writerow([k, json.dumps(v) if isinstance(v, (dict, list)) else v])
        return buf.getvalue()
    body = {"command": result.subcommand, "params": result.params, "result": result.payload}
    return json.dumps(body, indent=2) + "\n"


def run(argv=None) -> CommandResult:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return CommandResult(None, {}, status=int(exc.code or 0), error="usage")
    params = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    result = CommandResult(args.command, _round(params, 12), fmt=args.format)
    try:
        result.payload = _round(args.func(args), args.precision)
    except (SpreadError, ValueError, KeyError, OSError) as exc:
        result.status, result.error = 1, f"{type(exc).__name__}: {exc}"
    return result


def main(argv=None) -> int:
    result = run(argv)
    if result.status == 0:
        sys.stdout.write(format_payload(result, result.fmt))
    elif result.error and result.error != "usage":
        print(f"entspread: error: {result.error}", file=sys.stderr)
    return result.status


if __name__ == "__main__":
    sys.exit(main())
