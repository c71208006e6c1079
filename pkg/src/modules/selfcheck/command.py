# src/modules/selfcheck/command.py
from __future__ import annotations

import dataclasses
import itertools
import logging
from dataclasses import dataclass
from typing import Callable, Iterator

from src.algebra.homology import dihedral_fast_path, exactness_at_middle, h1_bar, rotation_subgroup
from src.algebra.lattices import LatticeModule, PresetCatalog
from src.algebra.oracle import oracle_class_count, oracle_is_feasible
from src.algebra.phases import GaugeFunction, coboundary, cohomology_classes, pair, reduce_to_torsion
from src.algebra.products import commuting_configurations
from src.core.app import EXIT_CHECK_FAILED, EXIT_OK, QcohomApp
from src.core.config import JobConfig, Settings
from src.core.errors import QcohomError
from src.core.inputs import resolve_lattices
from src.core.utils import emit, render

log = logging.getLogger("selfcheck")

HEADERS = ("lattice", "check", "status", "detail")

PRODUCT_CHECK_MAX_ORDER = 24
PRODUCT_CHECKS_PER_LATTICE = 64


@dataclass(frozen=True)
class CheckResult:
    lattice: str
    check: str
    passed: bool
    detail: str = ""

    def row(self) -> list:
        return [self.lattice, self.check, "pass" if self.passed else "FAIL", self.detail]

    def to_dict(self) -> dict:
        return {"lattice": self.lattice, "check": self.check, "passed": self.passed, "detail": self.detail}


@dataclass(frozen=True)
class SuiteOptions:
    pairing_sign: int = 1
    modulus_override: int | None = None


def check_duality(lattice: LatticeModule, expected: tuple[int, ...] | None, opts: SuiteOptions) -> Iterator[CheckResult]:
    h1 = h1_bar(lattice)
    classes = cohomology_classes(lattice)
    yield CheckResult(lattice.name, "duality", h1.order == classes.order,
                      f"|H1| = {h1.order}, |H^1| = {classes.order}")
    if expected is not None:
        yield CheckResult(lattice.name, "expected", h1.invariant_factors == expected,
                          f"got {h1.invariant_factors}, expected {expected}")


def check_oracle(lattice: LatticeModule, expected: tuple[int, ...] | None, opts: SuiteOptions) -> Iterator[CheckResult]:
    if not oracle_is_feasible(lattice):
        return
    count = oracle_class_count(lattice)
    order = h1_bar(lattice).order
    yield CheckResult(lattice.name, "oracle", count.classes == order,
                      f"{count.cocycles} cocycles / {count.coboundaries} coboundaries vs |H1| = {order}")


def check_exactness(lattice: LatticeModule, expected: tuple[int, ...] | None, opts: SuiteOptions) -> Iterator[CheckResult]:
    if lattice.group.family != "dihedral" or lattice.group.rotation is None:
        return
    report = exactness_at_middle(lattice, rotation_subgroup(lattice))
    yield CheckResult(lattice.name, "exactness", report.exact,
                      f"|im alpha| = {report.image_alpha}, |ker beta| = {report.kernel_beta}")
    fast = dihedral_fast_path(lattice)
    if fast is not None:
        bar = h1_bar(lattice).invariant_factors
        yield CheckResult(lattice.name, "dihedral_shortcut", fast == bar, f"shortcut {fast}, bar complex {bar}")


def check_torsion(lattice: LatticeModule, expected: tuple[int, ...] | None, opts: SuiteOptions) -> Iterator[CheckResult]:
    h1 = h1_bar(lattice)
    n = lattice.group.order
    for i, phi in enumerate(cohomology_classes(lattice).generators):
        gauge = GaugeFunction(4 * n, tuple(range(1, lattice.rank + 1)))
        rescaled = phi + coboundary(gauge, lattice)
        try:
            reduced = reduce_to_torsion(rescaled, opts.modulus_override)
        except QcohomError as e:
            yield CheckResult(lattice.name, f"torsion[{i}]", False, f"{type(e).__name__}: {e}")
            continue
        same = all(pair(reduced, c) == pair(phi, c) for c in h1.generators)
        yield CheckResult(lattice.name, f"torsion[{i}]", same and n % reduced.modulus == 0,
                          f"modulus {rescaled.modulus} -> {reduced.modulus}")


def check_products(lattice: LatticeModule, expected: tuple[int, ...] | None, opts: SuiteOptions) -> Iterator[CheckResult]:
    if lattice.group.order > PRODUCT_CHECK_MAX_ORDER:
        return
    classes = cohomology_classes(lattice)
    if classes.is_trivial:
        return
    configs = itertools.islice(commuting_configurations(lattice), PRODUCT_CHECKS_PER_LATTICE)
    failures, total, nonzero = [], 0, 0
    for conf in configs:
        for phi in classes.generators:
            result = conf.check(phi, sign=opts.pairing_sign)
            total += 1
            nonzero += bool(result.rhs)
            if not result.holds:
                failures.append(f"{conf.describe()}: {result.lhs} != {result.rhs}")
    if total:
        detail = f"{total} configurations, {nonzero} nonzero" if not failures else failures[0]
        yield CheckResult(lattice.name, "cup_cap", not failures, detail)


SUITE: tuple[Callable[[LatticeModule, tuple[int, ...] | None, SuiteOptions], Iterator[CheckResult]], ...] = (
    check_duality, check_oracle, check_exactness, check_torsion, check_products,
)


def run_suite(lattices: list[tuple[LatticeModule, tuple[int, ...] | None]], opts: SuiteOptions) -> list[CheckResult]:
    results = []
    for lattice, expected in lattices:
        for check in SUITE:
            try:
                results.extend(check(lattice, expected, opts))
            except QcohomError as e:
                results.append(CheckResult(lattice.name, check.__name__.removeprefix("check_"), False,
                                           f"{type(e).__name__}: {e}"))
        log.info("checked %s", lattice.name)
    return results


class Selfcheck:
    def __init__(self, app: QcohomApp):
        self.app = app

    def __call__(self, job: JobConfig) -> int:
        catalog = self.app.registry.get(PresetCatalog)
        settings = self.app.registry.get(Settings)
        if not (job.presets or job.all_presets or job.group_path):
            job = dataclasses.replace(job, all_presets=True)
        inputs = []
        for lattice in resolve_lattices(job, catalog, settings):
            expected = catalog.expected_factors(lattice.name) if lattice.name in catalog.names() else None
            inputs.append((lattice, expected))
        opts = SuiteOptions(pairing_sign=-1 if job.flip_pairing_sign else 1, modulus_override=job.modulus_override)
        results = run_suite(inputs, opts)
        emit(render(job.format, HEADERS, [r.row() for r in results], [r.to_dict() for r in results]), job.out)
        failed = [r for r in results if not r.passed]
        if failed:
            log.error("%d of %d checks failed", len(failed), len(results))
            return EXIT_CHECK_FAILED
        return EXIT_OK


def setup(app: QcohomApp) -> None:
    sub = app.add_command("selfcheck", "Cross-check the independent code paths on the presets.", Selfcheck(app))
    sub.add_argument("--flip-pairing-sign", dest="flip_pairing_sign", action="store_true",
                     help="negate the cap-side pairing (the product checks must then fail)")
    sub.add_argument("--modulus-override", dest="modulus_override", type=int, metavar="M",
                     help="reduce cocycles to modulus M instead of the group order")
