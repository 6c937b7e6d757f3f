"""
Two-step design: minimize the design energy in the target, then keep only the
sequences that actually fold to it.
"""
import logging
from dataclasses import dataclass, replace
from enum import Enum

from src.analysis.enumeration import fold_sequences
from src.analysis.min_ehp import min_ehp_oracle
from src.config import (
    DEFAULT_EPS,
    DEFAULT_TF,
    SA_LIMIT,
    SA_STEPS,
    SPECTRUM_LIMIT,
    STATE_LIMIT,
    STRUCTURE_LIMIT,
)
from src.design.annealer import sa_minimize
from src.encoding.ising import format_value, qubo_to_ising, spectrum, to_qubo
from src.errors import NoMinimizerFound, SolverCapExceeded
from src.lattice.core import DesignEnergyModel, HpSequence, canonicalize, contact_map, hp_energy
from src.quantum.anneal import AnnealSchedule, DriverKind, IntegratorConfig, evolve, sample_bitstrings

logger = logging.getLogger(__name__)


class SolverChoice(Enum):
    EXACT = "exact"
    SA = "sa"
    SCHRODINGER = "schrodinger"


SOLVER_CAPS = {
    SolverChoice.EXACT: SPECTRUM_LIMIT,
    SolverChoice.SA: SA_LIMIT,
    SolverChoice.SCHRODINGER: STATE_LIMIT,
}


class Verdict(Enum):
    UNIQUE_GS = "UNIQUE_GS"
    DEGENERATE_GS = "DEGENERATE_GS"
    BETTER_ELSEWHERE = "BETTER_ELSEWHERE"
    UNVERIFIED = "UNVERIFIED"


@dataclass(frozen=True)
class DesignVerdict:
    sequence: HpSequence
    min_ehp_in_target: int
    verdict: Verdict
    evidence: object = None   # FoldResult, or None when unverified

    def to_dict(self):
        return {
            "sequence": self.sequence.text,
            "ehp": self.min_ehp_in_target,
            "verdict": self.verdict.value,
        }


@dataclass(frozen=True)
class DesignReport:
    target: object
    n_h: int
    lam: object
    solver: SolverChoice
    candidates: tuple
    oracle_min_ehp: int
    oracle_degeneracy: int
    flagged: tuple = ()   # (HpSequence, E_HP in target) rejected as above the oracle minimum
    gap: object = None

    @property
    def n(self):
        if self.target is not None:
            return self.target.n
        return len(self.candidates[0].sequence) if self.candidates else None

    def verdict_counts(self):
        counts = {v: 0 for v in Verdict}
        for c in self.candidates:
            counts[c.verdict] += 1
        return counts

    def to_dict(self):
        return {
            "target": self.target.moves if self.target is not None else None,
            "n": self.n,
            "n_h": self.n_h,
            "lambda": format_value(self.lam) if self.lam is not None else None,
            "solver": self.solver.value if self.solver is not None else None,
            "oracle_min_ehp": self.oracle_min_ehp,
            "oracle_degeneracy": self.oracle_degeneracy,
            "gap": format_value(self.gap) if self.gap is not None else None,
            "candidates": [c.to_dict() for c in self.candidates],
            "flagged": [{"sequence": s.text, "ehp": e} for s, e in self.flagged],
        }


def _check_cap(solver, n):
    cap = SOLVER_CAPS[solver]
    if n > cap:
        raise SolverCapExceeded(solver.value, n, cap)


def _ising(model):
    return qubo_to_ising(to_qubo(model))


def _optimize(cmap, n_h, lam, solver, budget, seed, threads=None, sa_steps=SA_STEPS,
              t_f=DEFAULT_TF, eps=DEFAULT_EPS):
    """
    Runs the chosen solver and splits its output against the oracle minimum.

    Returns:
        tuple: (accepted sequences, flagged (sequence, E_HP) pairs, SpectrumSummary or None)
    """
    solver = SolverChoice(solver)
    _check_cap(solver, cmap.n)
    model = DesignEnergyModel(cmap, lam, n_h)
    oracle = min_ehp_oracle(cmap, n_h)

    summary = None
    if solver is SolverChoice.EXACT:
        summary = spectrum(_ising(model))
        found = summary.ground_sequences(cmap.n)
    elif solver is SolverChoice.SA:
        found = sa_minimize(model, restarts=budget, steps=sa_steps, seed=seed, threads=threads).best_sequences
    else:
        state = evolve(_ising(model), DriverKind.X, AnnealSchedule(t_f), IntegratorConfig(eps=eps))
        found = [HpSequence.from_index(x, cmap.n) for x in set(sample_bitstrings(state, budget, seed))]

    accepted, flagged = set(), set()
    for seq in found:
        ehp = hp_energy(cmap, seq)
        if seq.n_h == n_h and ehp == oracle.min_ehp:
            accepted.add(seq)
        else:
            flagged.add((seq, ehp))
    if flagged:
        logger.warning("%d sequences from %s are above the oracle minimum %d", len(flagged), solver.value,
                       oracle.min_ehp)
    if not accepted:
        raise NoMinimizerFound(
            f"Solver {solver.value} found no sequence at the oracle minimum E_HP={oracle.min_ehp}"
        )
    return accepted, sorted(flagged, key=lambda f: f[0].text), summary


def optimize_sequences(target, n_h, lam, solver, budget, seed, threads=None, sa_steps=SA_STEPS,
                       t_f=DEFAULT_TF, eps=DEFAULT_EPS):
    accepted, _, _ = _optimize(contact_map(target), n_h, lam, solver, budget, seed, threads, sa_steps, t_f, eps)
    return frozenset(accepted)


def _classify(seq, ehp, fold, target_moves):
    if fold.min_ehp < ehp:
        return Verdict.BETTER_ELSEWHERE
    if fold.unique and fold.ground_state_moves[0] == target_moves:
        return Verdict.UNIQUE_GS
    return Verdict.DEGENERATE_GS


def filter_by_folding(candidates, target, n_limit=STRUCTURE_LIMIT):
    """
    Folds every candidate exactly and classifies it against the target.

    Chains longer than n_limit cannot be folded, so their candidates are marked
    UNVERIFIED. Candidates are deduplicated and reported in sequence order.
    """
    cmap = contact_map(target)
    seqs = sorted(set(candidates), key=lambda s: s.text)
    compositions = {s.n_h for s in seqs}
    n_h = compositions.pop() if len(compositions) == 1 else None

    if cmap.n > n_limit:
        logger.warning("N=%d exceeds the folding limit %d; verdicts left unverified", cmap.n, n_limit)
        folds = [None] * len(seqs)
    else:
        folds = fold_sequences(seqs, n_limit)

    target_moves = canonicalize(target).moves
    verdicts = []
    for seq, fold in zip(seqs, folds):
        ehp = hp_energy(cmap, seq)
        verdict = Verdict.UNVERIFIED if fold is None else _classify(seq, ehp, fold, target_moves)
        verdicts.append(DesignVerdict(seq, ehp, verdict, fold))

    oracle_min, oracle_degeneracy = None, None
    if n_h is not None:
        oracle = min_ehp_oracle(cmap, n_h)
        oracle_min, oracle_degeneracy = oracle.min_ehp, oracle.degeneracy
    return DesignReport(target, n_h, None, None, tuple(verdicts), oracle_min, oracle_degeneracy)


def design(target, n_h, lam, solver, budget, seed, threads=None, n_limit=STRUCTURE_LIMIT, sa_steps=SA_STEPS,
           t_f=DEFAULT_TF, eps=DEFAULT_EPS):
    solver = SolverChoice(solver)
    accepted, flagged, summary = _optimize(
        contact_map(target), n_h, lam, solver, budget, seed, threads, sa_steps, t_f, eps
    )
    report = filter_by_folding(accepted, target, n_limit)

    model = DesignEnergyModel(contact_map(target), lam, n_h)
    if summary is None and model.n <= STATE_LIMIT:
        summary = spectrum(_ising(model))
    oracle = min_ehp_oracle(model.cmap, n_h)
    report = replace(
        report,
        n_h=n_h,
        lam=model.lam,
        solver=solver,
        oracle_min_ehp=oracle.min_ehp,
        oracle_degeneracy=oracle.degeneracy,
        flagged=tuple(flagged),
        gap=summary.gap if summary is not None else None,
    )
    counts = report.verdict_counts()
    logger.info(
        "Design for %s: %d candidates (%d unique, %d degenerate, %d better elsewhere)",
        target.moves, len(report.candidates), counts[Verdict.UNIQUE_GS], counts[Verdict.DEGENERATE_GS],
        counts[Verdict.BETTER_ELSEWHERE],
    )
    return report


def design_contact_map(cmap, n_h, lam, solver, budget, seed, threads=None, sa_steps=SA_STEPS,
                       t_f=DEFAULT_TF, eps=DEFAULT_EPS):
    """
    Optimizes against a bare contact map, e.g. one reconstructed by hand for a
    chain too long to enumerate. There is no walk to fold against, so every
    candidate comes back UNVERIFIED; the oracle minimum and degeneracy are
    still exact.
    """
    solver = SolverChoice(solver)
    accepted, flagged, summary = _optimize(cmap, n_h, lam, solver, budget, seed, threads, sa_steps, t_f, eps)
    model = DesignEnergyModel(cmap, lam, n_h)
    if summary is None and model.n <= STATE_LIMIT:
        summary = spectrum(_ising(model))
    oracle = min_ehp_oracle(cmap, n_h)
    candidates = tuple(
        DesignVerdict(seq, hp_energy(cmap, seq), Verdict.UNVERIFIED)
        for seq in sorted(accepted, key=lambda s: s.text)
    )
    logger.info("Design for a %d-bead contact map: %d candidates at E_HP=%d (degeneracy %d)",
                cmap.n, len(candidates), oracle.min_ehp, oracle.degeneracy)
    return DesignReport(
        None, n_h, model.lam, solver, candidates, oracle.min_ehp, oracle.degeneracy,
        flagged=tuple(flagged), gap=summary.gap if summary is not None else None,
    )
