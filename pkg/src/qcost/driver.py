"""Bottom-up expected-cost analysis.

Statements are processed right to left. A loop nest is handed to the
certificate search together with its (already closed) continuation; the
verified invariant of the outermost loop replaces the loop and analysis
continues outward. When a loop resists, the search climbs a ladder of
heuristic choices before giving up with Unknown.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

from . import density
from .arith import QSqrt2, var_rank
from .certificate import (
    CapExceeded, MAX_LEVEL, SolverError, Template, emit, encode, solve_system, template_gen,
)
from .constraints import PolyOptions, reduce_side_conditions
from .expect import terms as T
from .expect.cost import CostExpr
from .frontend.ast import (
    Consume, Gate, If, IntLit, Program, Seq, Stmt, While,
)
from .frontend.check import map_stmt
from .transformer import (
    Frame, FrameError, OutOfTime, Transformer, classical_vars, costfree, frame_of, guard_vars, make_state,
    measurement_probabilities, trace_reduced_vars,
)

log = logging.getLogger(__name__)

TRACKED_LEVELS = 3
MAX_DENSITY_LEVEL = 2
DEGREE_WEIGHT = 16  # objective weight per degree of a norm body
PROBE_MAX_QUBITS = 4  # wider registers make the symbolic probe dominate the run


@dataclass
class AnalysisConfig:
    template_level: int = 0
    max_template_level: int = MAX_LEVEL
    tracked_level: int = 0
    degree: int = 1
    max_degree: int = 3
    density_level: int = 1
    max_density_level: int = MAX_DENSITY_LEVEL
    timeout: float = 10.0  # per solver call, seconds
    budget: float = 120.0  # whole analysis, seconds
    solver: Optional[str] = None
    backend: str = "auto"
    separation: bool = True
    frames: bool = True
    emit_smt: Optional[str] = None
    dump_terms: bool = False
    dump_constraints: bool = False
    product_cap: int = 4000


@dataclass
class LoopReport:
    loc: str
    invariant_text: str
    template_level: int
    tracked_level: int
    degree: int
    density_level: int
    method: str


@dataclass
class AnalysisResult:
    outcome: str  # "Bound" | "Unknown"
    bound: Optional[CostExpr] = None
    reason: str = ""
    per_loop: List[LoopReport] = field(default_factory=list)
    constraints: int = 0
    smt_calls: int = 0
    attempts: int = 0
    wall_ms: float = 0.0
    dumps: List[str] = field(default_factory=list)

    @property
    def bound_text(self) -> Optional[str]:
        return None if self.bound is None else str(self.bound)

    def to_json(self) -> Dict[str, object]:
        return {
            "outcome": self.outcome,
            "bound_text": self.bound_text,
            "reason": self.reason,
            "per_loop": [asdict(r) for r in self.per_loop],
            "stats": {
                "constraints": self.constraints,
                "smt_calls": self.smt_calls,
                "attempts": self.attempts,
                "wall_ms": round(self.wall_ms, 3),
            },
        }


class Unknown(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


# program instrumentation


def count_gate(s: Stmt, gate: str) -> Stmt:
    """Charge one unit before every application of ``gate``."""
    names = {gate, gate + "dg"} if gate in ("T", "S") else {gate}
    return map_stmt(s, lambda x: Seq(Consume(IntLit(1)), x) if isinstance(x, Gate) and x.gate in names else None)


def count_iterations(s: Stmt) -> Stmt:
    """Charge one unit at the head of every loop body."""
    return map_stmt(s, lambda x: While(x.cond, Seq(Consume(IntLit(1)), x.body), x.loc)
                    if isinstance(x, While) else None)


# loop nests


def nest_of(loop: While) -> List[Tuple[While, Optional[str]]]:
    """Loops of a nest in pre-order, each with the location of its parent."""
    out: List[Tuple[While, Optional[str]]] = []

    def go(s: Stmt, parent: Optional[str]):
        if isinstance(s, While):
            out.append((s, parent))
            go(s.body, s.loc)
        elif isinstance(s, Seq):
            go(s.first, parent)
            go(s.second, parent)
        elif isinstance(s, If):
            go(s.then, parent)
            go(s.orelse, parent)

    go(loop, None)
    return out


def children(loop: While) -> List[While]:
    """Loops directly inside the body of ``loop``."""
    out: List[While] = []

    def go(s: Stmt):
        if isinstance(s, While):
            out.append(s)
        elif isinstance(s, Seq):
            go(s.first)
            go(s.second)
        elif isinstance(s, If):
            go(s.then)
            go(s.orelse)

    go(loop.body)
    return out


def objective_weights(tpls) -> Dict[str, float]:
    out: Dict[str, float] = {}
    for tp in tpls:
        for sm in tp.cost.summands:
            for u in sm.weight.vars():
                out[u] = float(DEGREE_WEIGHT ** sm.body.num.degree())
    return out


class Analyzer:
    def __init__(self, prog: Program, cfg: Optional[AnalysisConfig] = None, name: str = "program"):
        self.prog = prog
        self.cfg = cfg or AnalysisConfig()
        self.name = name
        self.result = AnalysisResult("Unknown")
        self.deadline = 0.0
        self._probe: Dict[str, frozenset] = {}
        self._frames: Dict[int, Optional[Frame]] = {}
        self._solver_error: Optional[str] = None

    # public entry

    def run(self) -> AnalysisResult:
        t0 = time.monotonic()
        self.deadline = t0 + self.cfg.budget
        try:
            term = self.infer(self.prog.body, T.ZERO)
            bound = T.close(term)
            self.result.outcome = "Bound"
            self.result.bound = bound
        except Unknown as exc:
            if self._solver_error and exc.reason != "budget":
                raise SolverError(self._solver_error)
            self.result.outcome = "Unknown"
            self.result.reason = exc.reason
        self.result.wall_ms = (time.monotonic() - t0) * 1000.0
        return self.result

    # bottom-up inference

    def infer(self, s: Stmt, t: T.Term) -> T.Term:
        if isinstance(s, Seq):
            return self.infer(s.first, self.infer(s.second, t))
        if isinstance(s, If):
            b = Transformer(self.prog).conv.boolean(s.cond)
            return T.cond(b, self.infer(s.then, t), self.infer(s.orelse, t))
        if isinstance(s, While):
            return self.infer_while(s, t)
        term, scs = Transformer(self.prog).infer(s, t)
        assert not scs
        return term

    def infer_while(self, loop: While, t: T.Term) -> T.Term:
        nested = len(nest_of(loop)) > 1
        if self.cfg.separation and nested and not T.close(t).is_zero():
            # separation: cost with zero continuation plus cost-free value of the continuation
            a = self.infer_while_nest(loop, T.ZERO)
            b = self.infer_while_nest(While(loop.cond, costfree(loop.body), loop.loc), t)
            return T.TCost(T.close(a) + T.close(b))
        return self.infer_while_nest(loop, t)

    # ladder

    def attempts(self) -> Iterator[Tuple[int, int, int, int]]:
        c = self.cfg
        for dl in range(c.density_level, max(c.density_level, c.max_density_level) + 1):
            for deg in range(c.degree, max(c.degree, c.max_degree) + 1):
                for tl in range(c.tracked_level, TRACKED_LEVELS):
                    for lvl in range(c.template_level, max(c.template_level, c.max_template_level) + 1):
                        yield lvl, tl, deg, dl

    def probe(self, loop: While) -> frozenset:
        if loop.loc not in self._probe:
            vs = set()
            if self.prog.n_qubits <= PROBE_MAX_QUBITS:
                for p in measurement_probabilities(self.prog, loop):
                    vs |= trace_reduced_vars(p, self.prog.n_qubits)
            self._probe[loop.loc] = frozenset(vs)
        return self._probe[loop.loc]

    def tracked(self, loop: While, level: int, matrix: bool = True) -> List[str]:
        # the probe is costly on wide registers; level-0 templates never read matrix variables
        out = set(guard_vars(loop)) | (self.probe(loop) if matrix else frozenset())
        n = self.prog.n_qubits
        if level >= 1:
            out |= set(classical_vars(self.prog))
            out |= {density.density_var("d", i) for i in range(1, (1 << n) + 1)}
        if level >= 2:
            out |= set(density.density_vars(n))
        return sorted(out, key=var_rank)

    def templates(self, nest, t: T.Term, lvl: int, tl: int) -> Dict[str, Template]:
        out: Dict[str, Template] = {}
        conv = Transformer(self.prog).conv
        for loop, parent in nest:
            names = self.tracked(loop, tl, matrix=lvl >= 1)
            matrix = [v for v in names if v not in self.prog.decls]
            ints = [v for v in names if self.prog.decls.get(v) == "int"]
            if parent is None:
                cont = T.close(t)
            else:
                # the rest of the parent body is unknown here: parent norms plus a constant
                pt = out[parent]
                cont = pt.cost.instantiate({u: QSqrt2(1) for u in pt.unknowns}) + CostExpr.const(1)
            out[loop.loc] = template_gen(loop.loc, conv.boolean(loop.cond), matrix, lvl, cont, ints)
        return out

    def frames_for(self, loop: While) -> Dict[int, Frame]:
        """Cost-only summaries of the loops directly inside ``loop``; empty if one fails."""
        out: Dict[int, Frame] = {}
        for c in children(loop):
            if id(c) not in self._frames:
                try:
                    cost = T.close(self.infer_while_nest(c, T.ZERO))
                    self._frames[id(c)] = frame_of(c, cost)
                except Unknown as exc:
                    if exc.reason == "budget":
                        raise
                    self._frames[id(c)] = None
            fr = self._frames[id(c)]
            if fr is None:
                return {}
            out[id(c)] = fr
        return out

    def infer_while_nest(self, loop: While, t: T.Term) -> T.Term:
        nest = nest_of(loop)
        modes: List[Tuple[str, list, Dict[int, Frame]]] = []
        if self.cfg.frames and len(nest) > 1:
            frames = self.frames_for(loop)
            if frames:
                modes.append(("frame", [(loop, None)], frames))
        modes.append(("joint", nest, {}))
        tried = set()
        reasons: List[str] = []
        for mode, sub, frames in modes:
            for lvl, tl, deg, dl in self.attempts():
                if time.monotonic() > self.deadline:
                    raise Unknown("budget")
                tpls = self.templates(sub, t, lvl, tl)
                sig = (mode, tuple(str(tp.cost) for tp in tpls.values()), deg, dl)
                if sig in tried:
                    continue
                tried.add(sig)
                try:
                    out = self.attempt(loop, t, sub, tpls, frames, (lvl, tl, deg, dl), reasons)
                except FrameError:
                    reasons.append("frame")
                    break
                if out is not None:
                    return out
        raise Unknown("timeout" if "timeout" in reasons else "unsat")

    def attempt(self, loop: While, t: T.Term, sub, tpls: Dict[str, Template], frames: Dict[int, Frame],
                rung: Tuple[int, int, int, int], reasons: List[str]) -> Optional[T.Term]:
        lvl, tl, deg, dl = rung
        cfg = self.cfg
        domains = {loc: make_state(self.prog, sorted(tp.cost.vars(), key=var_rank))
                   for loc, tp in tpls.items()}
        tr = Transformer(self.prog, domains, frames, self.deadline)
        alpha = {loc: tp.cost for loc, tp in tpls.items()}
        try:
            head, scs = tr.infer(loop, t)
            self.result.attempts += 1
            costs, polys = reduce_side_conditions(scs, alpha, PolyOptions(self.prog.n_qubits, dl),
                                                  self.deadline)
        except OutOfTime:
            raise Unknown("budget") from None
        unknowns = sorted(u for tp in tpls.values() for u in tp.unknowns)
        try:
            sysm = encode(polys, unknowns, deg, cfg.product_cap)
            sysm.weights = objective_weights(tpls.values())
        except CapExceeded as exc:
            reasons.append("cap")
            log.debug("attempt %s skipped: %s", rung, exc)
            return None
        tag = f"{loop.loc}_t{lvl}_k{tl}_n{deg}_d{dl}" + ("_f" if frames else "")
        if cfg.dump_terms:
            self.result.dumps.append(f"== terms {tag}\n" + "\n".join(str(sc) for sc in scs))
        if cfg.dump_constraints:
            text = [f"== constraints {tag}"]
            text += ["-- template " + str(tp) for tp in tpls.values()]
            text += ["-- cost"] + [str(c) for c in costs]
            text += ["-- poly"] + [str(p) for p in polys]
            self.result.dumps.append("\n".join(text))
        if cfg.emit_smt:
            os.makedirs(cfg.emit_smt, exist_ok=True)
            with open(os.path.join(cfg.emit_smt, f"{self.name}_{tag}.smt2"), "w", encoding="utf-8") as fh:
                fh.write(emit(sysm))
        self.result.constraints += len(polys)
        remaining = self.deadline - time.monotonic()
        if remaining <= 0:
            raise Unknown("budget")
        try:
            out = solve_system(sysm, min(cfg.timeout, remaining), cfg.solver, cfg.backend)
        except SolverError as exc:
            self._solver_error = str(exc)
            reasons.append("solver")
            return None
        self.result.smt_calls += out.smt_calls
        if out.status != "sat":
            reasons.append(out.status)
            return None
        for lp, _ in sub:
            tp = tpls[lp.loc]
            self.result.per_loop.append(LoopReport(
                lp.loc, str(tp.instantiate(out.model)), lvl, tl, deg, dl, out.method))
        return T.TCost(tpls[loop.loc].instantiate(out.model))


def analyze(prog: Program, cfg: Optional[AnalysisConfig] = None, name: str = "program") -> AnalysisResult:
    return Analyzer(prog, cfg, name).run()


def result_json(res: AnalysisResult) -> str:
    return json.dumps(res.to_json(), indent=2, sort_keys=True)
