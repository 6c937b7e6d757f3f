"""
Command-line experiments: enumerate, design, simulate, chi, noise.

Every run writes its outputs plus a manifest.json into --out. Exit codes:
0 success, 1 usage or bad input, 2 resource cap, 3 solver failure.
"""
import argparse
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field

import pandas as pd

from src import __version__
from src.analysis.enumeration import designability, enumerate_structures, most_designable
from src.analysis.min_ehp import min_ehp_oracle
from src.config import (
    CG_TOL,
    CHI_EPS_LIST,
    DEFAULT_EPS,
    DEFAULT_TF,
    DEFAULT_THREADS,
    DESIGNABILITY_LIMIT,
    DRIVER_SIGN,
    J_MAX,
    LAMBDA_DESIGN,
    LAMBDA_QPU,
    NOISE_SAMPLES,
    NOISE_X,
    QPU_BENCHMARK_SYSTEMS,
    SA_RESTARTS,
    SA_STEPS,
    STRUCTURE_LIMIT,
    chain_length,
    default_seed,
    load_config_file,
)
from src.design.pipeline import SolverChoice, design, design_contact_map, filter_by_folding
from src.encoding.ising import (
    format_value,
    level_counts,
    qubo_to_ising,
    rescale,
    sector_ground_states,
    spectrum,
    to_qubo,
)
from src.errors import CapExceeded, HpDesignError, SolverFailure
from src.lattice.core import (
    ContactMap,
    DesignEnergyModel,
    HpSequence,
    contact_map,
    design_energy,
    hp_energy,
    to_fraction,
)
from src.quantum.anneal import (
    AnnealSchedule,
    DriverKind,
    IntegratorConfig,
    TraceRecorder,
    annealing_time_sweep,
    chi_table,
    evolve,
    ground_state_probability,
    sample_bitstrings,
)
from src.quantum.noise import NoiseSpec, NoiseSystem, jcs_sweep, n_sweep, x_sweep
from src.utils.file_utils import (
    read_contact_map_file,
    read_ising_file,
    read_structure_file,
    validate_contact_map_file,
    validate_ising_file,
    validate_structure_file,
    write_csv,
    write_ising_file,
    write_json,
)
from src.utils.summarizer import (
    format_chi_frame,
    format_design_report,
    format_noise_frame,
    format_p_g_sweep,
    get_trace_summary,
)

logger = logging.getLogger(__name__)

EXIT_USAGE = 1
EXIT_CAP = 2
EXIT_SOLVER = 3


class UsageError(HpDesignError, ValueError):
    pass


class ArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: int
    version: str = __version__
    wall_time: float = 0.0
    outputs: list = field(default_factory=list)

    def record(self, path):
        self.outputs.append(os.path.basename(path))
        return path


# --- Parsing helpers ---

def _float_list(text):
    return [float(v) for v in str(text).split(",") if v.strip()]


def _truthy(text):
    return str(text).strip().lower() in ("1", "true", "yes", "on")


def _apply_config(parser, values):
    """Config-file values become parser defaults; explicit flags still win."""
    defaults = {}
    for action in parser._actions:
        names = {s.lstrip("-").replace("-", "_") for s in action.option_strings} | {action.dest}
        key = next((name for name in sorted(names) if name in values), None)
        if key is None:
            continue
        raw = values[key]
        if isinstance(action, argparse._StoreTrueAction):
            defaults[action.dest] = _truthy(raw)
        else:
            defaults[action.dest] = action.type(raw) if action.type else raw
    parser.set_defaults(**defaults)


def _add_common(p):
    p.add_argument("--out", default="results", help="Output directory")
    p.add_argument("--threads", type=int, default=DEFAULT_THREADS, help="Worker processes")
    p.add_argument("--seed", type=int, default=None, help="Random seed (default: $HPDESIGN_SEED or built-in)")


def _add_target(p, with_problem=False):
    p.add_argument("--structure", help="File holding the target move-string (and optionally a sequence)")
    p.add_argument("--contact-map", help="File holding the target contact map: n, then 'i j' lines")
    p.add_argument("--target-n", type=int, help="Use the most designable structure of this length")
    if with_problem:
        p.add_argument("--problem", help="Ising export file (h/J/offset lines) used instead of a target")
    p.add_argument("--nh", type=int, help="Number of H beads")


def build_parser():
    parser = ArgumentParser(prog="hpdesign", description="HP lattice protein design and annealing experiments")
    parser.add_argument("--config", help="key=value file mirroring the long flags")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="Enumerate structures (and designability)")
    p.add_argument("--n", type=int, required=False, help="Chain length")
    p.add_argument("--designability", action="store_true", help="Also rank structures by designability")
    p.add_argument("--limit", type=int, default=STRUCTURE_LIMIT, help="Structure enumeration cap")
    p.add_argument("--designability-limit", type=int, default=DESIGNABILITY_LIMIT, help="Designability cap")
    _add_common(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("design", help="Optimize sequences for a target and filter by folding")
    _add_target(p)
    p.add_argument("--lambda", dest="lam", default=LAMBDA_DESIGN, help="Composition penalty")
    p.add_argument("--solver", choices=[s.value for s in SolverChoice], default=SolverChoice.EXACT.value)
    p.add_argument("--budget", type=int, default=SA_RESTARTS, help="SA restarts or Schrodinger reads")
    p.add_argument("--sa-steps", type=int, default=SA_STEPS)
    p.add_argument("--tf", type=float, default=DEFAULT_TF)
    p.add_argument("--eps", type=float, default=DEFAULT_EPS)
    _add_common(p)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("simulate", help="Schrodinger-equation anneal of a design problem")
    _add_target(p, with_problem=True)
    p.add_argument("--lambda", dest="lam", default=LAMBDA_QPU)
    p.add_argument("--driver", choices=[d.value for d in DriverKind], default=DriverKind.X.value)
    p.add_argument("--driver-sign", type=int, choices=[-1, 1], default=DRIVER_SIGN)
    p.add_argument("--tf", default=str(DEFAULT_TF), help="Annealing time; comma-separated for a P_g-vs-t_f sweep")
    p.add_argument("--eps", type=float, default=DEFAULT_EPS)
    p.add_argument("--cg-tol", type=float, default=CG_TOL)
    p.add_argument("--jcs", type=float, help="Rescale the problem by J_cs / J_max before evolving")
    p.add_argument("--drop-penalty", action="store_true", help="Build the problem with lambda = 0 (XY driver)")
    p.add_argument("--restrict-subspace", action="store_true", help="Evolve XY inside the weight-n_h sector")
    p.add_argument("--trace", action="store_true", help="Write trace.csv")
    p.add_argument("--trace-every", type=int, default=1)
    p.add_argument("--reads", type=int, default=0, help="Number of sampled reads to write")
    p.add_argument("--sweep", choices=["none", "n"], default="none", help="n: run every benchmark system")
    p.add_argument("--min-gap", default="0", help="Smallest gap kept by --sweep n")
    p.add_argument("--max-n", type=int, default=DESIGNABILITY_LIMIT, help="Largest N used by --sweep n")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("chi", help="Integrator-order diagnostic over a step-size ladder")
    _add_target(p, with_problem=True)
    p.add_argument("--lambda", dest="lam", default=LAMBDA_QPU)
    p.add_argument("--driver", choices=[d.value for d in DriverKind], default=DriverKind.X.value)
    p.add_argument("--tf", default=str(DEFAULT_TF), help="Comma-separated annealing times")
    p.add_argument("--eps-list", default=CHI_EPS_LIST, help="Comma-separated step sizes")
    p.add_argument("--cg-tol", type=float, default=CG_TOL)
    _add_common(p)
    p.set_defaults(func=cmd_chi)

    p = sub.add_parser("noise", help="Control-error ensembles and sweeps")
    _add_target(p, with_problem=True)
    p.add_argument("--lambda", dest="lam", default=LAMBDA_QPU)
    p.add_argument("--x", default=str(NOISE_X), help="Noise strength (comma-separated for --sweep x)")
    p.add_argument("--k", type=int, help="Physical qubits per logical qubit (default by N)")
    p.add_argument("--jcs", default="2.25", help="Chain strength (comma-separated for --sweep jcs)")
    p.add_argument("--samples", type=int, default=NOISE_SAMPLES)
    p.add_argument("--sweep", choices=["none", "jcs", "x", "n"], default="none")
    p.add_argument("--min-gap", default="1.0", help="Smallest gap kept by --sweep n")
    p.add_argument("--max-n", type=int, default=DESIGNABILITY_LIMIT, help="Largest N used by --sweep n")
    _add_common(p)
    p.set_defaults(func=cmd_noise)
    return parser, sub


# --- Shared pieces ---

def _prepare_out(args):
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _seed(args):
    return args.seed if args.seed is not None else default_seed()


def _require_nh(args):
    if args.nh is None:
        raise UsageError("--nh is required")
    return args.nh


@dataclass(frozen=True)
class TargetInput:
    structure: object   # LatticeStructure, or None when only a contact map was given
    cmap: ContactMap
    sequence: object = None   # HpSequence from the structure file's optional second line


def _load_target(args):
    """
    Reads the target from --structure, --contact-map or --target-n. A
    sequence line in the structure file fills in --nh when it is missing.
    """
    given = [flag for flag, value in (("--structure", args.structure), ("--contact-map", args.contact_map),
                                      ("--target-n", args.target_n)) if value]
    if len(given) > 1:
        raise UsageError(f"Give only one target, got {' and '.join(given)}")
    if args.structure:
        is_ok, reason = validate_structure_file(args.structure)
        if not is_ok:
            raise UsageError(reason)
        structure, sequence = read_structure_file(args.structure)
        target = TargetInput(structure, contact_map(structure), sequence)
    elif args.contact_map:
        is_ok, reason = validate_contact_map_file(args.contact_map)
        if not is_ok:
            raise UsageError(reason)
        target = TargetInput(None, read_contact_map_file(args.contact_map))
    elif args.target_n:
        structure = most_designable(args.target_n, threads=args.threads)
        target = TargetInput(structure, contact_map(structure))
    else:
        raise UsageError("A target is required: --structure FILE, --contact-map FILE or --target-n N")

    if args.nh is None and target.sequence is not None:
        args.nh = target.sequence.n_h
        logger.info("Using n_h=%d from the sequence in %s", args.nh, args.structure)
    return target


def _load_problem(args, lam=None):
    """
    The Ising problem for simulate/chi/noise, from --problem or built from the target.

    Returns:
        tuple: (IsingProblem, DesignEnergyModel or None, TargetInput or None)
    """
    if getattr(args, "problem", None):
        is_ok, reason = validate_ising_file(args.problem)
        if not is_ok:
            raise UsageError(reason)
        return read_ising_file(args.problem), None, None
    target = _load_target(args)
    model = DesignEnergyModel(target.cmap, args.lam if lam is None else lam, _require_nh(args))
    return qubo_to_ising(to_qubo(model)), model, target


def _write_manifest(manifest, out, started):
    manifest.wall_time = round(time.time() - started, 3)
    write_json(asdict(manifest), os.path.join(out, "manifest.json"))


def _parameters(args):
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


# --- Commands ---

def cmd_enumerate(args):
    if args.n is None:
        raise UsageError("--n is required")
    started = time.time()
    out = _prepare_out(args)
    manifest = RunManifest("enumerate", _parameters(args), _seed(args))
    print(f"🚀 Enumerating structures for N={args.n}")

    structures = list(enumerate_structures(args.n, limit=args.limit, threads=args.threads))
    counts = {}
    if args.designability:
        ranking = designability(args.n, limit=args.designability_limit, threads=args.threads)
        counts = {r.structure.moves: r.count for r in ranking}
        ranked = pd.DataFrame(
            [
                {
                    "rank": pos,
                    "canonical_moves": r.structure.moves,
                    "designability_count": r.count,
                    "sequences": ";".join(s.text for s in r.sequences),
                }
                for pos, r in enumerate(ranking, start=1)
            ],
            columns=["rank", "canonical_moves", "designability_count", "sequences"],
        )
        write_csv(ranked, manifest.record(os.path.join(out, "ranking.csv")))
        print(f"✅ Most designable: {ranking.most_designable().moves} "
              f"({ranking[0].count} sequences); unique ground states: {100 * ranking.unique_fraction:.2f}%")

    databank = pd.DataFrame(
        [{"canonical_moves": s.moves, "designability_count": counts.get(s.moves)} for s in structures],
        columns=["canonical_moves", "designability_count"],
    )
    if counts:
        databank["designability_count"] = databank["designability_count"].astype("int64")
    write_csv(databank, manifest.record(os.path.join(out, "databank.csv")))
    print(f"✅ {len(structures)} structures written to {out}")
    _write_manifest(manifest, out, started)
    return 0


def cmd_design(args):
    started = time.time()
    out = _prepare_out(args)
    seed = _seed(args)
    manifest = RunManifest("design", _parameters(args), seed)
    target = _load_target(args)
    n_h = _require_nh(args)
    label = target.structure.moves if target.structure is not None else args.contact_map
    print(f"🚀 Designing for {label} (N={target.cmap.n}, n_h={n_h}) with {args.solver}")

    options = dict(threads=args.threads, sa_steps=args.sa_steps, t_f=args.tf, eps=args.eps)
    if target.structure is None:
        report = design_contact_map(target.cmap, n_h, to_fraction(args.lam), args.solver, args.budget, seed, **options)
    else:
        report = design(target.structure, n_h, to_fraction(args.lam), args.solver, args.budget, seed, **options)
    data = report.to_dict()
    if target.sequence is not None:
        # The sequence given with the structure is folded and judged like a candidate.
        data["reference"] = filter_by_folding([target.sequence], target.structure).candidates[0].to_dict()
    write_json(data, manifest.record(os.path.join(out, "design_report.json")))
    print(format_design_report(data), end="")
    print(f"✅ Report written to {out}")
    _write_manifest(manifest, out, started)
    return 0


def _ground_set(problem, driver, n_h):
    if driver is DriverKind.XY:
        return sector_ground_states(problem, n_h)
    return spectrum(problem).ground_states


def cmd_simulate(args):
    t_fs = _float_list(args.tf)
    if not t_fs:
        raise UsageError("--tf needs at least one annealing time")
    driver = DriverKind(args.driver)
    if args.drop_penalty and driver is not DriverKind.XY:
        raise UsageError("--drop-penalty only makes sense with --driver xy")
    if args.sweep == "n" or len(t_fs) > 1:
        if args.trace or args.reads:
            raise UsageError("--trace and --reads need a single --tf and no --sweep")
        return _simulate_sweep(args, driver, t_fs)

    t_f = t_fs[0]
    started = time.time()
    out = _prepare_out(args)
    seed = _seed(args)
    manifest = RunManifest("simulate", _parameters(args), seed)

    problem, model, _ = _load_problem(args, lam=0 if args.drop_penalty else None)
    if driver is DriverKind.XY:
        _require_nh(args)
    # Readouts are scored against the penalized design energy even when the evolution drops it.
    if model is not None and args.drop_penalty:
        model = DesignEnergyModel(model.cmap, args.lam, model.n_h)
    write_ising_file(problem, manifest.record(os.path.join(out, "problem.ising")))
    ground = sorted(_ground_set(problem, driver, args.nh))
    levels = [{"energy": format_value(e), "count": c} for e, c in level_counts(problem, levels=3)]
    if args.jcs is not None:
        problem, r = rescale(problem, args.jcs, J_MAX)
        logger.info("Rescaled by r=%s", r)

    config = IntegratorConfig(
        eps=args.eps, cg_tol=args.cg_tol, driver_sign=args.driver_sign, restrict_subspace=args.restrict_subspace
    )
    print(f"🚀 Evolving {problem.n} qubits, driver={driver.value}, t_f={t_f}, eps={args.eps}")
    recorder = None
    if args.trace:
        recorder = TraceRecorder(ground, n_h=args.nh if driver is DriverKind.XY else None, every=args.trace_every)
    state = evolve(problem, driver, AnnealSchedule(t_f), config, n_h=args.nh, observer=recorder)
    p_g = ground_state_probability(state, ground)

    result = {
        "n": problem.n,
        "driver": driver.value,
        "t_f": t_f,
        "eps": args.eps,
        "P_g": p_g,
        "ground_states": [HpSequence.from_index(x, problem.n).text for x in ground],
        "levels": levels,
    }
    if recorder is not None:
        trace = recorder.frame()
        write_csv(trace, manifest.record(os.path.join(out, "trace.csv")))
        result["trace"] = get_trace_summary(trace)

    if args.reads > 0:
        reads = _score_reads(sample_bitstrings(state, args.reads, seed), problem, model, set(ground))
        write_csv(reads, manifest.record(os.path.join(out, "reads.csv")))
        result["hit_rate"] = float(reads["hit"].mean())

    write_json(result, manifest.record(os.path.join(out, "simulate.json")))
    print(f"✅ P_g = {p_g:.6f}")
    _write_manifest(manifest, out, started)
    return 0


def _simulate_sweep(args, driver, t_fs):
    """P_g against annealing time, for one problem or for every benchmark system (--sweep n)."""
    started = time.time()
    out = _prepare_out(args)
    manifest = RunManifest("simulate", _parameters(args), _seed(args))
    lam = 0 if args.drop_penalty else None

    if args.sweep == "n":
        systems = [(system_id, problem, n_h) for system_id, n_h, _, _, problem in _benchmark_problems(args, lam)]
        if not systems:
            raise UsageError("No benchmark system passes --max-n and --min-gap")
    else:
        problem, model, _ = _load_problem(args, lam=lam)
        if model is not None:
            systems = [(f"T{problem.n}_NH{model.n_h}", problem, model.n_h)]
        else:
            systems = [(os.path.basename(args.problem), problem, args.nh)]

    config = IntegratorConfig(
        eps=args.eps, cg_tol=args.cg_tol, driver_sign=args.driver_sign, restrict_subspace=args.restrict_subspace
    )
    frames = []
    for system_id, problem, n_h in systems:
        if driver is DriverKind.XY and n_h is None:
            raise UsageError("--nh is required")
        ground = _ground_set(problem, driver, n_h)
        if args.jcs is not None:
            problem, _ = rescale(problem, args.jcs, J_MAX)
        print(f"🚀 {system_id}: {len(t_fs)} annealing times, driver={driver.value}, eps={args.eps}")
        frame = annealing_time_sweep(problem, driver, t_fs, config, n_h=n_h, ground_set=ground,
                                     threads=args.threads)
        frame.insert(0, "system_id", system_id)
        frame.insert(1, "n", problem.n)
        frame.insert(2, "n_h", n_h)
        frames.append(frame)

    table = pd.concat(frames, ignore_index=True)
    write_csv(table, manifest.record(os.path.join(out, "p_g_sweep.csv")))
    print(format_p_g_sweep(table), end="")
    print(f"✅ Written to {out}")
    _write_manifest(manifest, out, started)
    return 0


def _score_reads(samples, problem, model, ground):
    rows = []
    oracle = min_ehp_oracle(model.cmap, model.n_h) if model is not None else None
    for pos, x in enumerate(samples):
        seq = HpSequence.from_index(x, problem.n)
        if model is not None:
            energy = design_energy(model, seq)
            hit = seq.n_h == model.n_h and hp_energy(model.cmap, seq) == oracle.min_ehp
        else:
            energy = problem.energy([2 * b - 1 for b in seq.beads])
            hit = x in ground
        rows.append({"read": pos, "sequence": seq.text, "energy": format_value(energy), "hit": hit})
    return pd.DataFrame(rows, columns=["read", "sequence", "energy", "hit"])


def cmd_chi(args):
    started = time.time()
    out = _prepare_out(args)
    manifest = RunManifest("chi", _parameters(args), _seed(args))
    eps_list = _float_list(args.eps_list)
    if len(set(eps_list)) < 3:
        raise UsageError("--eps-list needs at least 3 step sizes (2*eps, eps, eps/2)")
    driver = DriverKind(args.driver)
    problem, _, _ = _load_problem(args)
    if driver is DriverKind.XY:
        _require_nh(args)
    ground = _ground_set(problem, driver, args.nh)
    config = IntegratorConfig(cg_tol=args.cg_tol)
    frames = []
    for t_f in _float_list(args.tf):
        print(f"🚀 t_f={t_f}: {len(eps_list)} step sizes")
        frames.append(chi_table(problem, driver, t_f, eps_list, config, n_h=args.nh, ground_set=ground,
                                threads=args.threads))
    table = pd.concat(frames, ignore_index=True)
    if table["chi"].isna().all():
        logger.warning("No step size has both 2*eps and eps/2 in the list; chi is undefined everywhere")
    write_csv(table, manifest.record(os.path.join(out, "chi.csv")))
    print(format_chi_frame(table), end="")
    print(f"✅ Written to {out}")
    _write_manifest(manifest, out, started)
    return 0


def _benchmark_problems(args, lam=None):
    """
    Benchmark systems up to --max-n whose gap (with --lambda) is at least --min-gap.

    Yields:
        tuple: (system_id, n_h, j_cs, DesignEnergyModel, IsingProblem built with lam when given)
    """
    min_gap = to_fraction(args.min_gap)
    for n, n_h, j_cs in QPU_BENCHMARK_SYSTEMS:
        if n > args.max_n:
            continue
        target = most_designable(n, threads=args.threads)
        model = DesignEnergyModel(contact_map(target), args.lam, n_h)
        problem = qubo_to_ising(to_qubo(model))
        gap = spectrum(problem).gap
        if gap < min_gap:
            logger.info("Skipping T%d/N_H=%d: gap %s below %s", n, n_h, gap, min_gap)
            continue
        if lam is not None:
            problem = qubo_to_ising(to_qubo(DesignEnergyModel(model.cmap, lam, n_h)))
        yield f"T{n}_NH{n_h}", n_h, j_cs, model, problem


def _benchmark_systems(args, x):
    return [
        NoiseSystem(system_id, problem, NoiseSpec(x, args.k or chain_length(model.n), j_cs), n_h,
                    format_value(model.lam))
        for system_id, n_h, j_cs, model, problem in _benchmark_problems(args)
    ]


def cmd_noise(args):
    started = time.time()
    out = _prepare_out(args)
    seed = _seed(args)
    manifest = RunManifest("noise", _parameters(args), seed)
    xs, jcs = _float_list(args.x), _float_list(args.jcs)
    if args.sweep != "x" and len(xs) != 1:
        raise UsageError("--x takes a single value unless --sweep x")
    if args.sweep != "jcs" and len(jcs) != 1:
        raise UsageError("--jcs takes a single value unless --sweep jcs")

    slope = None
    if args.sweep == "n":
        systems = _benchmark_systems(args, xs[0])
        if not systems:
            raise UsageError("No benchmark system passes --max-n and --min-gap")
        print(f"🚀 Noise sweep over {len(systems)} systems, {args.samples} samples each")
        frame, slope = n_sweep(systems, args.samples, seed, threads=args.threads)
    else:
        problem, model, target = _load_problem(args)
        k = args.k or chain_length(problem.n)
        labels = {
            "system_id": f"T{problem.n}_NH{model.n_h}" if model is not None else os.path.basename(args.problem),
            "n_h": model.n_h if model is not None else None,
            "lam": format_value(model.lam) if model is not None else None,
        }
        print(f"🚀 Noise ensemble on {problem.n} spins, {args.samples} samples")
        if args.sweep == "x":
            frame = x_sweep(problem, xs, k, jcs[0], args.samples, seed, args.threads, **labels)
        else:
            frame = jcs_sweep(problem, xs[0], k, jcs, args.samples, seed, args.threads, **labels)

    write_csv(frame, manifest.record(os.path.join(out, "noise_sweep.csv")))
    if args.sweep == "n":
        write_json({"log_slope": slope}, manifest.record(os.path.join(out, "noise_fit.json")))
    print(format_noise_frame(frame, slope), end="")
    print(f"✅ Written to {out}")
    _write_manifest(manifest, out, started)
    return 0


# --- Entry point ---

def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)

    parser, sub = build_parser()
    if known.config:
        try:
            values = load_config_file(known.config)
            for subparser in sub.choices.values():
                _apply_config(subparser, values)
        except (OSError, ValueError) as e:
            print(f"❌ Could not use config file: {e}", file=sys.stderr)
            return EXIT_USAGE
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except CapExceeded as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_CAP
    except SolverFailure as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_SOLVER
    except (HpDesignError, ValueError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE
