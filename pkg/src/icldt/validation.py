"""Static and semantic checks on theories, and decision ordering."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ICLError
from .model import Alternative, Atom, Theory
from .program import CyclicProgramError, acyclic_order, enumerate_worlds, world, world_count

PROB_TOLERANCE = 1e-9
DEFAULT_MAX_WORLDS = 2**20


@dataclass(frozen=True)
class Issue:
    code: str
    message: str
    location: str = ""

    def __str__(self) -> str:
        loc = f" [{self.location}]" if self.location else ""
        return f"{self.code}{loc}: {self.message}"


@dataclass
class ValidationReport:
    errors: list[Issue] = field(default_factory=list)
    warnings: list[Issue] = field(default_factory=list)
    semantic_checks_run: bool = False

    @property
    def ok(self) -> bool:
        return not self.errors

    def codes(self) -> set[str]:
        return {e.code for e in self.errors}

    def error(self, code: str, message: str, location: str = "") -> None:
        self.errors.append(Issue(code, message, location))

    def warn(self, code: str, message: str, location: str = "") -> None:
        self.warnings.append(Issue(code, message, location))

    def merge(self, other: "ValidationReport") -> "ValidationReport":
        return ValidationReport(
            self.errors + other.errors,
            self.warnings + other.warnings,
            self.semantic_checks_run or other.semantic_checks_run,
        )


def is_empty(theory: Theory) -> bool:
    return not theory.blocks and not theory.rules


def validate_static(theory: Theory, tolerance: float = PROB_TOLERANCE) -> ValidationReport:
    report = ValidationReport()
    if is_empty(theory):
        report.warn("NOTHING_TO_SOLVE", "theory declares no blocks and no rules")
        return report

    seen_ids: set[str] = set()
    for b in theory.blocks:
        if b.id in seen_ids:
            report.error("DUPLICATE_BLOCK", f"block id {b.id!r} declared twice", b.id)
        seen_ids.add(b.id)
        atoms = b.choices if isinstance(b, Alternative) else b.atoms
        if not atoms:
            report.error("EMPTY_BLOCK", f"block {b.id!r} has no atoms", b.id)
        if len(set(atoms)) != len(atoms):
            report.error("DUPLICATE_ATOM", f"block {b.id!r} repeats an atom", b.id)
        if any(a.is_utility for a in atoms):
            report.error("RESERVED_ATOM", f"block {b.id!r} uses the reserved utility atom", b.id)

    owner: dict[Atom, str] = {}
    for alt in theory.alternatives:
        for c in alt.choices:
            if c in owner and owner[c] != alt.id:
                report.error(
                    "OVERLAPPING_ALTERNATIVES",
                    f"{c} appears in both {owner[c]!r} and {alt.id!r}",
                    alt.id,
                )
            owner.setdefault(c, alt.id)

    for alt in theory.nature:
        if len(alt.probs) != len(alt.choices):
            report.error("PROB_MISSING", f"nature block {alt.id!r} lacks probabilities", alt.id)
            continue
        for c, p in zip(alt.choices, alt.probs):
            if not 0.0 <= p <= 1.0:
                report.error("PROB_RANGE", f"P({c}) = {p} outside [0,1]", alt.id)
        total = sum(alt.probs)
        if abs(total - 1.0) > tolerance:
            report.error("PROB_SUM", f"probabilities of {alt.id!r} sum to {total:g}, not 1", alt.id)

    heads = set()
    for r in theory.rules:
        heads.add(r.head)
        if r.head in owner:
            report.error("ATOMIC_CHOICE_HEAD", f"atomic choice {r.head} is the head of rule {r}", str(r.head))
        for b in r.body:
            if b.is_utility:
                report.error("RESERVED_ATOM", f"utility atom used in the body of {r}", str(r.head))

    acyclic = True
    try:
        acyclic_order(theory.rules)
    except CyclicProgramError as exc:
        acyclic = False
        report.error("CYCLIC_PROGRAM", exc.message, " ".join(map(str, exc.cycle)))

    for o in theory.observables:
        for a in o.atoms:
            if a not in owner and a not in heads:
                report.error(
                    "UNDEFINED_OBSERVATION",
                    f"observation {a} is neither an atomic choice nor a rule head",
                    o.id,
                )

    obs_owner: dict[Atom, str] = {}
    for o in theory.effective_observables:
        for a in o.atoms:
            if a in obs_owner and obs_owner[a] != o.id:
                report.error(
                    "OVERLAPPING_OBSERVABLES",
                    f"{a} belongs to observation alternatives {obs_owner[a]!r} and {o.id!r}",
                    o.id,
                )
            obs_owner.setdefault(a, o.id)

    decisions = theory.decisions
    for d in decisions:
        for ref in d.observes:
            if ref not in theory.block_by_id:
                report.error("DANGLING_OBSERVES", f"decision {d.id!r} observes unknown block {ref!r}", d.id)
            elif ref == d.id:
                report.error("SELF_OBSERVATION", f"decision {d.id!r} observes itself", d.id)

    for d1 in decisions:
        for d2 in decisions:
            if d1 is d2 or len(d1.observes) > len(d2.observes):
                continue
            if len(d1.observes) == len(d2.observes):
                if d1.id < d2.id:
                    report.error(
                        "NO_FORGETTING",
                        f"decisions {d1.id!r} and {d2.id!r} cannot be ordered",
                        d1.id,
                    )
                continue
            if d1.id not in d2.observes or not set(d1.observes) < set(d2.observes):
                report.error(
                    "NO_FORGETTING",
                    f"{d2.id!r} must observe {d1.id!r} and everything {d1.id!r} observes",
                    d2.id,
                )

    if acyclic:
        deps = _dependencies(theory)
        for d in decisions:
            dset = set(d.choices)
            for o in theory.observed(d):
                for a in o.atoms:
                    bad = deps.get(a, set()) & dset
                    if bad or a in dset:
                        report.error(
                            "OBSERVATION_ORDER",
                            f"observation {a} of decision {d.id!r} depends on its own action",
                            d.id,
                        )
    return report


def _dependencies(theory: Theory) -> dict[Atom, set[Atom]]:
    """Transitive body-atom dependencies of every rule head."""
    deps: dict[Atom, set[Atom]] = {}
    for r in theory.ordered_rules:
        acc = deps.setdefault(r.head, set())
        for b in r.body:
            acc.add(b)
            acc |= deps.get(b, set())
    return deps


def validate_semantic(theory: Theory, max_worlds: int = DEFAULT_MAX_WORLDS) -> ValidationReport:
    """Utility and observation completeness/consistency by world enumeration."""
    report = ValidationReport()
    if is_empty(theory):
        report.semantic_checks_run = True
        return report
    n = world_count(theory)
    if n > max_worlds:
        report.warn("SEMANTIC_SKIPPED", f"{n} worlds exceed the bound of {max_worlds}")
        return report

    observables = theory.effective_observables
    reported: set[tuple[str, str]] = set()

    def once(code: str, key: str, message: str, location: str = "") -> None:
        if (code, key) not in reported:
            reported.add((code, key))
            report.error(code, message, location)

    for sel in enumerate_worlds(theory):
        true = world(theory, sel)
        label = "{" + ", ".join(str(a) for a in sel.values()) + "}"
        values = sorted({a.utility_value for a in true if a.is_utility})
        if not values:
            once("UTILITY_INCOMPLETE", label, f"no utility in world {label}")
        elif len(values) > 1:
            once("UTILITY_INCONSISTENT", label, f"utilities {values} in world {label}")
        for o in observables:
            hits = [a for a in o.atoms if a in true]
            if len(hits) > 1:
                once(
                    "OBSERVATION_INCONSISTENT",
                    o.id,
                    f"{', '.join(map(str, hits))} all true in world {label}",
                    o.id,
                )
            elif not hits:
                once("OBSERVATION_INCOMPLETE", o.id, f"no atom of {o.id!r} true in world {label}", o.id)
    report.semantic_checks_run = True
    return report


def validate(
    theory: Theory, max_worlds: int = DEFAULT_MAX_WORLDS, tolerance: float = PROB_TOLERANCE
) -> ValidationReport:
    report = validate_static(theory, tolerance)
    if report.ok:
        report = report.merge(validate_semantic(theory, max_worlds))
    return report


def decision_order(theory: Theory) -> list[Alternative]:
    """Decisions sorted so that each observes strictly more than the one before.

    Raises ICLError(NO_TOTAL_ORDER) when the observation sets do not nest
    with each earlier decision observed by every later one.
    """
    ordered = sorted(theory.decisions, key=lambda d: len(d.observes))
    for earlier, later in zip(ordered, ordered[1:]):
        if earlier.id not in later.observes or not set(earlier.observes) < set(later.observes):
            raise ICLError(
                "NO_TOTAL_ORDER",
                f"decisions {earlier.id!r} and {later.id!r} are not ordered by observation",
            )
    return ordered


def require_valid(
    theory: Theory, max_worlds: int = DEFAULT_MAX_WORLDS, tolerance: float = PROB_TOLERANCE
) -> ValidationReport:
    report = validate(theory, max_worlds, tolerance)
    if not report.ok:
        first = report.errors[0]
        raise ICLError(first.code, str(first))
    return report

