"""Experiment Orchestrator - runs one ``smockctl`` command on a scene.

Every command follows the same three-step pipeline:

    1. Resolve - turn the scene into (k, pattern) pairs, the limit space and
       the command parameters; validation and budget failures stop here
    2. Compute - hand the work to the services and agents, one k at a time,
       in ascending order
    3. Report - collect rows into a ``Report`` carrying the scene hash, the
       seed and the reading conventions as metadata

Commands:
    dist, constants, hausdorff, net, gh, converge, local-bounds, tangent,
    defect, measure, and demo <example31 | example32 | remark36 | lattice-l1>

Error Handling:
    - Domain failures raise ``SmockError`` subclasses and are logged before
      they propagate; the CLI turns them into exit status 2
    - Nothing is truncated silently: budgets raise BudgetExceeded
"""

import logging
import math
from typing import Callable, Dict, Optional

import numpy as np
from pydantic import ValidationError

from smock.agents import convergence
from smock.agents.tangent import DEFECT_TARGET, TangentConeAgent
from smock.agents.weak_convergence import panel_id, weak_convergence_check
from smock.config import get_settings, overrides
from smock.errors import InvalidNormSpec, MissingSeed, SceneError, SmockError, UnknownCommand
from smock.models.family import Custom, Euclidean, Example32
from smock.models.geometry import CompactSet
from smock.models.measure import Exact1D
from smock.models.metric import FiniteMetricSpace
from smock.models.norm import NormSpec
from smock.models.pattern import Window
from smock.models.report import Report
from smock.models.scene import MatrixDoc, Scene
from smock.services import euclid, gh
from smock.services.constructions import EXAMPLE31_LAYOUT, instantiate, l1_spec, remark36
from smock.services.measure import PushforwardMeasure
from smock.services.scenes import load_patterns
from smock.services.smocked import D_K_READING, SmockedSpace, smocking_constants

logger = logging.getLogger(__name__)

DEMOS = ("example31", "example32", "remark36", "lattice-l1")
ORACLE_MAX_STITCHES = 5
# consecutive k up to 10, then powers of two
EXAMPLE32_KS = list(range(2, 11)) + [16, 32]


class ExperimentOrchestrator:
    """Runs the command pipeline for one scene.

    Args:
        scene: parsed scene, or None for ``demo``
        scene_hash: sha256 of the canonical scene text, recorded in the output
        seed: CLI seed, overriding the scene's
        budget: CLI cap on net candidates and d_k enumeration
    """

    def __init__(
        self,
        scene: Optional[Scene] = None,
        scene_hash: str = "",
        seed: Optional[int] = None,
        budget: Optional[int] = None,
    ):
        self.scene = scene
        self.scene_hash = scene_hash
        exp = scene.experiment if scene is not None else None
        self.seed = seed if seed is not None else (exp.seed if exp is not None else None)
        self.budget = budget if budget is not None else (exp.budget if exp is not None else None)

        self.commands: Dict[str, Callable[[], Report]] = {
            "dist": self._dist,
            "constants": self._constants,
            "hausdorff": self._hausdorff,
            "net": self._net,
            "gh": self._gh,
            "converge": self._converge,
            "local-bounds": self._local_bounds,
            "tangent": self._tangent,
            "defect": self._defect,
            "measure": self._measure,
        }

    # ---- pipeline

    def run(self, command: str, name: Optional[str] = None) -> Report:
        if command != "demo" and command not in self.commands:
            raise UnknownCommand(f"Unknown command '{command}'", {"known": sorted(self.commands) + ["demo"]})
        if command != "demo" and self.scene is None:
            raise SceneError([("", f"command '{command}' needs a scene")])

        caps = {}
        if self.budget is not None:
            caps = {"net_max_candidates": self.budget, "dk_enumeration_budget": self.budget}
        try:
            with overrides(**caps):
                logger.info(f"📍 Step 1/3: resolving {command} {name or ''}".rstrip())
                if command == "demo":
                    report = self._demo(name)
                else:
                    report = self.commands[command]()
                logger.info(f"📍 Step 2/3: computed {len(report.rows)} rows")
        except SmockError as exc:
            logger.error(f"❌ {command} failed: {exc.message}")
            raise

        report.metadata.update(self._metadata(command, name))
        logger.info("📍 Step 3/3: report assembled")
        return report

    def _metadata(self, command: str, name: Optional[str]) -> Dict[str, str]:
        meta = {
            "command": command if name is None else f"{command} {name}",
            "scene_sha256": self.scene_hash or "none",
            "seed": str(self.seed) if self.seed is not None else "none",
            "d_k_reading": D_K_READING,
            "example31_layout": EXAMPLE31_LAYOUT,
        }
        if self.budget is not None:
            meta["budget"] = str(self.budget)
        return meta

    # ---- scene helpers

    @property
    def exp(self):
        return self.scene.experiment

    def _space(self, pattern) -> SmockedSpace:
        return SmockedSpace(pattern, self.scene.basepoint)

    def _center(self, space: SmockedSpace):
        return space.project(self.exp.center) if self.exp.center is not None else space.basepoint

    def _family(self):
        if self.scene.family is not None:
            return self.scene.family
        if not self.scene.pattern:
            return Euclidean(N=self.scene.dimension)
        return Custom(stitches=self.scene.pattern, window=self.scene.window)

    def _limit_space(self) -> Optional[SmockedSpace]:
        if self.exp.limit is None:
            return None
        return SmockedSpace(instantiate(self.exp.limit, self.exp.limit_k))

    def _norm(self) -> NormSpec:
        if self.exp.norm is None:
            raise SceneError([("experiment.norm", "this command needs a norm spec")])
        try:
            return self.exp.norm.to_spec()
        except ValidationError as exc:
            raise InvalidNormSpec(f"Invalid norm spec: {exc.errors()[0]['msg']}") from exc

    def _resolution(self) -> float:
        return self.exp.resolution or get_settings().sampling_resolution

    @staticmethod
    def _matrix_space(doc: MatrixDoc) -> FiniteMetricSpace:
        try:
            return FiniteMetricSpace(labels=doc.labels, dist=np.asarray(doc.dist), base_index=doc.base_index)
        except ValidationError as exc:
            raise SceneError([("experiment", e["msg"]) for e in exc.errors()]) from exc

    # ---- commands

    def _dist(self) -> Report:
        report = Report(command="dist")
        if not self.exp.pairs:
            raise SceneError([("experiment.pairs", "dist needs at least one pair of points")])
        for k, pattern in load_patterns(self.scene):
            space = self._space(pattern)
            for i, (v, w) in enumerate(self.exp.pairs):
                values = {
                    "d": space.pseudometric(v, w),
                    "d0": float(np.linalg.norm(np.subtract(v, w))),
                }
                if space.m <= ORACLE_MAX_STITCHES:
                    values["d_oracle"] = space.oracle_distance(v, w)
                report.add(k, values, text={"pair": str(i)})
        return report

    def _constants(self) -> Report:
        report = Report(command="constants")
        for k, pattern in load_patterns(self.scene):
            window = self.exp.evaluation_window or self.scene.window or pattern.window
            if not window.bounded:
                raise SceneError([("experiment.evaluation_window", "depth needs a bounded evaluation window")])
            c = smocking_constants(pattern, window, self.exp.grid_step)
            report.add(
                k,
                {
                    "depth_h": c.depth_h,
                    "l_min": c.l_min,
                    "l_max": c.l_max,
                    "delta": c.delta,
                    "stitch_count": len(pattern.stitches),
                },
                errors={"depth_h": 0.0 if math.isinf(c.depth_h) else c.depth_error},
            )
        return report

    def _hausdorff(self) -> Report:
        report = Report(command="hausdorff")
        exp = self.exp
        if exp.A is not None and exp.B is not None:
            est = euclid.hausdorff(exp.A, exp.B, self._resolution())
            report.add(0, {"hausdorff": est.value}, {"hausdorff": est.error}, {"method": est.method})
            return report
        if exp.B is None:
            raise SceneError([("experiment.B", "hausdorff needs B (and A, or a pattern to compare)")])
        for k, pattern in load_patterns(self.scene):
            if not pattern.stitches:
                raise SceneError([("pattern", "the pattern has no stitches to compare")])
            est = euclid.hausdorff(CompactSet(pieces=pattern.stitches), exp.B, self._resolution())
            report.add(k, {"hausdorff": est.value}, {"hausdorff": est.error}, {"method": est.method})
        return report

    def _net(self) -> Report:
        report = Report(command="net")
        exp = self.exp
        for k, pattern in load_patterns(self.scene):
            space = self._space(pattern)
            net = space.ball_net(self._center(space), exp.R, exp.eps, exp.resolution)
            off = net.dist[~np.eye(net.size, dtype=bool)]
            report.add(
                k,
                {
                    "net_size": net.size,
                    "diameter": net.diameter,
                    "min_separation": float(off.min()) if off.size else 0.0,
                },
                text={"R": repr(exp.R), "eps": repr(exp.eps)},
            )
        return report

    def _gh(self) -> Report:
        report = Report(command="gh")
        exp = self.exp
        if exp.X is not None and exp.Y is not None:
            X, Y = self._matrix_space(exp.X), self._matrix_space(exp.Y)
            exact = gh.gh_exact_small(X, Y) if max(X.size, Y.size) <= get_settings().gh_exact_max_points else None
            upper = gh.gh_upper(X, Y) if exact is None else max(gh.gh_upper(X, Y), exact)
            report.add(0, {"gh_lower": gh.gh_lower(X, Y), "gh_upper": upper, "gh_exact": exact})
            return report
        curve = convergence.pgh_curve(
            self._family(), exp.R, exp.eps, exp.ks, exp.limit, exp.limit_k, exp.resolution
        )
        return self._curve_report("gh", curve)

    def _curve_report(self, command: str, curve) -> Report:
        tol = get_settings().tolerance
        uppers = [(row.k, row.gh_upper) for row in curve.rows]
        rises = [k for (_, prev), (k, cur) in zip(uppers, uppers[1:]) if cur > prev + tol]
        report = Report(
            command=command,
            metadata={
                "comparison": curve.comparison,
                "gh_upper_rises": " ".join(str(k) for k in rises) or "none",
            },
        )
        for row in curve.rows:
            bar = 2.0 * row.net_eps
            report.add(
                row.k,
                {
                    "gh_lower": row.gh_lower,
                    "gh_upper": row.gh_upper,
                    "gh_exact": row.gh_exact,
                    "net_size": row.net_size,
                    "limit_net_size": row.limit_net_size,
                },
                {"gh_lower": bar, "gh_upper": bar, "gh_exact": bar},
                {"R": repr(row.R), "net_eps": repr(row.net_eps)},
            )
        return report

    def _converge(self) -> Report:
        exp = self.exp
        curve = convergence.pgh_curve(
            self._family(), exp.R, exp.eps, exp.ks, exp.limit, exp.limit_k, exp.resolution
        )
        return self._curve_report("converge", curve)

    def _local_bounds(self) -> Report:
        exp = self.exp
        family = self._family()
        report = Report(command="local-bounds")
        if exp.limit is not None:
            hyp = convergence.hypotheses_report(family, exp.limit, exp.R, exp.ks, exp.r, exp.limit_k)
            constants, hausdorff = hyp.constants, {r.k: r for r in hyp.hausdorff.rows}
            report.metadata["h1_toward_zero"] = str(hyp.h1).lower()
        else:
            constants, hausdorff = convergence.local_constants_report(family, exp.r, exp.ks), {}

        for row in constants.rows:
            values = {"L_r": row.L_r, "delta_r": row.delta_r, "stitch_count": row.stitch_count}
            errors = {}
            if row.k in hausdorff:
                values["hausdorff"] = hausdorff[row.k].hausdorff
                errors["hausdorff"] = hausdorff[row.k].error
            report.add(row.k, values, errors, {"radius": repr(row.radius)})
        report.metadata.update(
            {
                "r": repr(constants.r),
                "stabilized": str(constants.stabilized).lower(),
                "K_r": str(constants.K_r) if constants.K_r is not None else "none",
                "failed_bound": constants.failed_bound or "none",
            }
        )
        return report

    def _tangent(self) -> Report:
        exp = self.exp
        if not exp.x:
            raise SceneError([("experiment.x", "tangent needs a rational vector x")])
        result = TangentConeAgent(self._norm()).sweep(exp.x, exp.lambdas)
        return self._sweep_report(result)

    @staticmethod
    def _sweep_report(result) -> Report:
        report = Report(
            command="tangent",
            index_name="lambda",
            metadata={
                "x": " ".join(result.sweep.x),
                "rate_constant": repr(result.sweep.rate_constant),
                "subadditive": str(result.subadditive).lower(),
            },
        )
        for row in result.sweep.rows:
            report.add(row.lam, {"estimate": row.estimate, "norm": row.norm, "gap": row.gap})
        return report

    def _defect(self) -> Report:
        spec = self._norm()
        box = self.exp.sample_box or Window.cube(spec.dimension, 4.0)
        result = TangentConeAgent(spec).defect(box)
        report = Report(command="defect", metadata={"defect_target": DEFECT_TARGET})
        report.add(0, {"K": result.K, "sample_size": result.sample_size})
        return report

    def _method(self, dimension: int):
        method = self.exp.method
        if method is None:
            if dimension == 1:
                return Exact1D()
            raise MissingSeed(
                "Measures in dimension >= 2 need a Monte Carlo method with a seed or a grid method",
                {"path": "experiment.method"},
            )
        if self.seed is not None and getattr(method, "kind", "") == "monte_carlo":
            method = method.model_copy(update={"seed": self.seed})
        return method

    def _measure(self) -> Report:
        exp = self.exp
        method = self._method(self.scene.dimension)
        if exp.phis:
            limit = self._limit_space()
            if limit is None:
                raise SceneError([("experiment.limit", "weak convergence needs a limit space")])
            if exp.support_box is None:
                raise SceneError([("experiment.support_box", "integrals need a support box")])
            table = weak_convergence_check(self._family(), exp.phis, exp.ks, limit, exp.support_box, method)
            report = Report(
                command="measure",
                metadata={
                    "phi_panel": panel_id(exp.phis),
                    "method": method.kind,
                    "non_decreasing_phis": ",".join(str(i) for i in table.non_decreasing) or "none",
                },
            )
            for row in table.rows:
                report.add(
                    row.k,
                    {
                        "integral_k": row.integral_k,
                        "integral_limit": row.integral_limit,
                        "gap": row.gap,
                        "stitch_volume": row.stitch_volume,
                    },
                    {"gap": row.error},
                    {"phi": str(row.phi_index)},
                )
            return report

        if not exp.radii:
            raise SceneError([("experiment.radii", "measure needs radii or a phi panel")])
        report = Report(command="measure", metadata={"method": method.kind})
        for k, pattern in load_patterns(self.scene):
            space = self._space(pattern)
            measure = PushforwardMeasure(space, method)
            center = self._center(space)
            for r in exp.radii:
                est = measure.ball_volume(center, r)
                report.add(k, {"volume": est.value}, {"volume": est.error}, {"r": repr(r)})
        return report

    # ---- demos

    def _demo(self, name: Optional[str]) -> Report:
        if name not in DEMOS:
            raise UnknownCommand(f"Unknown demo '{name}'", {"known": list(DEMOS)})
        if name == "example31":
            sweep = convergence.endpoint_distance_sweep(range(1, 9))
            report = Report(
                command="demo-example31",
                metadata={"accumulation_points": " ".join(repr(p) for p in sweep.accumulation_points)},
            )
            for row in sweep.rows:
                report.add(
                    row.k,
                    {"distance": row.distance, "expected": row.expected, "L_k": row.L_k},
                    {"distance": row.error},
                )
            return report

        if name == "example32":
            eps = 0.05
            curve = convergence.pgh_curve(Example32(N=1), 2.0, eps, EXAMPLE32_KS, Euclidean(N=1))
            report = self._curve_report("demo-example32", curve)
            for row in report.rows:
                row.values["bound"] = 4.0 / row.index + eps
            report.value_columns.append("bound")
            return report

        if name == "remark36":
            report = Report(command="demo-remark36")
            R, eps = 5.0, 0.5
            for k in range(4, 9):
                space = SmockedSpace(remark36(k))
                net = space.ball_net(None, R, eps)
                euclidean = FiniteMetricSpace.from_points(net.positions).dist
                report.add(
                    k,
                    {
                        "max_abs_diff": float(np.abs(net.dist - euclidean).max()),
                        "L_max": space.l_max,
                        "net_size": net.size,
                    },
                )
            return report

        result = TangentConeAgent(l1_spec(2)).sweep(["1", "1"], [1, 2, 4, 8, 16, 32])
        report = self._sweep_report(result)
        report.command = "demo-lattice-l1"
        return report

