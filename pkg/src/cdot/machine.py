"""Store-based small-step evaluation: path lookup, resolution, case dispatch."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from cdot.diagnostics import STUCK_TERM, Diagnostic
from cdot.syntax import (
    Apply,
    Case,
    FieldDef,
    Lambda,
    Let,
    ObjectVal,
    Path,
    Projection,
    Term,
    Value,
    defs_seq,
    free_vars,
    fresh_name,
    substitute,
    var,
)


def _short(s: object, width: int = 72) -> str:
    text = str(s)
    return text if len(text) <= width else text[: width - 3] + "..."


# ---------------------------------------------------------------- store


@dataclass(frozen=True)
class Store:
    """Insertion-ordered map from variable names to values; never overwritten."""

    bindings: tuple[tuple[str, Value], ...] = ()

    def get(self, name: str) -> Value | None:
        for n, v in self.bindings:
            if n == name:
                return v
        return None

    def __contains__(self, name: str) -> bool:
        return self.get(name) is not None

    def names(self) -> set[str]:
        return {n for n, _ in self.bindings}

    def extend(self, name: str, value: Value) -> Store:
        if name in self:
            raise ValueError(f"store already binds {name}")
        return Store(self.bindings + ((name, value),))

    def __str__(self) -> str:
        return "{" + ", ".join(f"{n} = {_short(v, 40)}" for n, v in self.bindings) + "}"


@dataclass(frozen=True)
class Config:
    """A machine state: the store paired with the term under evaluation."""

    store: Store
    term: Term


# ---------------------------------------------------------------- lookup


@dataclass(frozen=True)
class LookupValue:
    """One lookup step reached a value; the path is therefore resolved."""

    value: Value
    rules: tuple[str, ...]


@dataclass(frozen=True)
class LookupPath:
    """One lookup step produced another path (an alias or a path field)."""

    path: Path
    rules: tuple[str, ...]


@dataclass(frozen=True)
class LookupUndefined:
    reason: str


def _field_initializer(obj: ObjectVal, name: str) -> Term | None:
    for d in defs_seq(obj.defs):
        if isinstance(d, FieldDef) and d.label.name == name:
            return d.rhs
    return None


def lookup_step(store: Store, p: Path) -> LookupValue | LookupPath | LookupUndefined:
    """One step of path lookup in the store.

    A root variable yields its stored value; a field selection on a path
    whose lookup reaches an object yields that field's stable term with the
    object's self variable replaced by the prefix path; a selection whose
    prefix steps to another path steps with it.
    """
    if not p.selections:
        v = store.get(p.root)
        if v is None:
            return LookupUndefined(f"{p.root} is not bound in the store")
        return LookupValue(v, ("Lookup-Step-Var",))
    prefix = p.prefix()
    name = p.last()
    assert prefix is not None
    r = lookup_step(store, prefix)
    if isinstance(r, LookupUndefined):
        return r
    if isinstance(r, LookupPath):
        return LookupPath(r.path.sel(name), r.rules + ("Lookup-Step-Path",))
    obj = r.value
    if not isinstance(obj, ObjectVal):
        return LookupUndefined(f"{prefix} is a function, so {p} selects nothing")
    init = _field_initializer(obj, name)
    if init is None:
        return LookupUndefined(f"{prefix} has no field named {name}")
    out = substitute(obj.self_name, prefix, init)
    rules = r.rules + ("Lookup-Step-Val",)
    if isinstance(out, Path):
        return LookupPath(out, rules)
    return LookupValue(out, rules)


def is_resolved(store: Store, p: Path) -> bool:
    """A resolved path reaches a value in a single lookup step."""
    return isinstance(lookup_step(store, p), LookupValue)


@dataclass(frozen=True)
class Resolution:
    path: Path
    value: Value
    hops: int


def resolve(store: Store, p: Path, fuel: int = 10000) -> Resolution | LookupUndefined | None:
    """Follow lookup steps from p until a resolved path; None when fuel runs out."""
    hops = 0
    while hops <= fuel:
        r = lookup_step(store, p)
        if isinstance(r, LookupUndefined):
            return r
        if isinstance(r, LookupValue):
            return Resolution(p, r.value, hops)
        p = r.path
        hops += 1
    return None


# ---------------------------------------------------------------- stepping


@dataclass(frozen=True)
class StepInfo:
    """What one reduction step did: the rule, its focus and premise lookups."""

    rule: str
    focus: str
    ctx_depth: int = 0
    lookups: tuple[str, ...] = ()
    note: str = ""

    def rules_used(self) -> set[str]:
        used = {self.rule} | set(self.lookups)
        if self.ctx_depth > 0:
            used.add("Ctx")
        return used


@dataclass(frozen=True)
class Next:
    config: Config
    info: StepInfo


@dataclass(frozen=True)
class NormalForm:
    kind: str


@dataclass(frozen=True)
class Stuck:
    diag: Diagnostic


@dataclass(frozen=True)
class PremiseFuelOut:
    """A transitive lookup inside a rule premise exceeded its fuel."""

    what: str


def _stuck(term: Term, reason: str, near_miss: tuple[str, ...]) -> Stuck:
    return Stuck(
        Diagnostic(
            code=STUCK_TERM,
            message=reason,
            subject=_short(term),
            notes=tuple(f"near miss: {r}" for r in near_miss),
        )
    )


def _resolve_tag(store: Store, obj: ObjectVal, at: Path, fuel: int):
    """The tag of an object reached at a path, with self bound to that path."""
    tag = substitute(obj.self_name, at, obj.tag)
    assert isinstance(tag, Projection)
    return tag, resolve(store, tag.path, fuel)


def step(cfg: Config, lookup_fuel: int = 10000) -> Next | NormalForm | Stuck | PremiseFuelOut:
    """Apply the unique reduction rule available at the evaluation focus."""
    return _step(cfg.store, cfg.term, 0, lookup_fuel)


def _step(store: Store, t: Term, depth: int, fuel: int):
    if isinstance(t, Path):
        r = lookup_step(store, t)
        if isinstance(r, LookupPath):
            return Next(
                Config(store, r.path),
                StepInfo("Resolve", _short(t), depth, r.rules),
            )
        if isinstance(r, LookupValue):
            return NormalForm("resolved-path")
        return _stuck(t, r.reason, ("Resolve",))

    if isinstance(t, Value):
        return NormalForm("value")

    if isinstance(t, Apply):
        head = lookup_step(store, t.fun)
        if isinstance(head, LookupPath):
            return Next(
                Config(store, Apply(head.path, t.arg)),
                StepInfo("Resolve", _short(t.fun), depth + 1, head.rules),
            )
        if isinstance(head, LookupUndefined):
            return _stuck(t, head.reason, ("Resolve", "Apply"))
        arg = lookup_step(store, t.arg)
        if isinstance(arg, LookupPath):
            return Next(
                Config(store, Apply(t.fun, arg.path)),
                StepInfo("Resolve", _short(t.arg), depth + 1, arg.rules),
            )
        if isinstance(arg, LookupUndefined):
            return _stuck(t, arg.reason, ("Resolve", "Apply"))
        fn = head.value
        if not isinstance(fn, Lambda):
            return _stuck(t, f"{t.fun} is an object, not a function", ("Apply",))
        return Next(
            Config(store, substitute(fn.param, t.arg, fn.body)),
            StepInfo("Apply", _short(t), depth, head.rules + arg.rules),
        )

    if isinstance(t, Let):
        bound = t.bound
        if isinstance(bound, Path):
            r = lookup_step(store, bound)
            if isinstance(r, LookupPath):
                return Next(
                    Config(store, Let(t.var, r.path, t.body)),
                    StepInfo("Resolve", _short(bound), depth + 1, r.rules),
                )
            if isinstance(r, LookupUndefined):
                return _stuck(t, r.reason, ("Resolve", "Let-Path"))
            return Next(
                Config(store, substitute(t.var, bound, t.body)),
                StepInfo("Let-Path", _short(t), depth, r.rules),
            )
        if isinstance(bound, Value):
            name, body, note = t.var, t.body, ""
            if name in store:
                name = fresh_name(name, store.names() | free_vars(body) | free_vars(bound))
                body = substitute(t.var, var(name), body)
                note = f"renamed {t.var} to {name}"
            return Next(
                Config(store.extend(name, bound), body),
                StepInfo("Let-Value", _short(t), depth, (), note),
            )
        inner = _step(store, bound, depth + 1, fuel)
        if isinstance(inner, Next):
            return Next(
                Config(inner.config.store, Let(t.var, inner.config.term, t.body)),
                inner.info,
            )
        return inner

    if isinstance(t, Case):
        scr = lookup_step(store, t.scrutinee)
        if isinstance(scr, LookupPath):
            return Next(
                Config(store, replace(t, scrutinee=scr.path)),
                StepInfo("Resolve", _short(t.scrutinee), depth + 1, scr.rules),
            )
        if isinstance(scr, LookupUndefined):
            return _stuck(t, scr.reason, ("Resolve", "Case-Then", "Case-Else"))
        pat = lookup_step(store, t.tag.path)
        if isinstance(pat, LookupPath):
            return Next(
                Config(store, replace(t, tag=Projection(pat.path, t.tag.label))),
                StepInfo("Resolve", _short(t.tag.path), depth + 1, pat.rules),
            )
        if isinstance(pat, LookupUndefined):
            return _stuck(t, pat.reason, ("Resolve", "Case-Then", "Case-Else"))
        vv = scr.value
        if isinstance(vv, Lambda):
            return Next(
                Config(store, t.else_branch),
                StepInfo("Case-Lambda", _short(t), depth, scr.rules),
            )
        assert isinstance(vv, ObjectVal)
        tag, res = _resolve_tag(store, vv, t.scrutinee, fuel)
        if res is None:
            return PremiseFuelOut(f"resolving runtime tag {tag} of {t.scrutinee}")
        if isinstance(res, LookupUndefined):
            return _stuck(t, res.reason, ("Case-Then", "Case-Else"))
        note = f"tag {res.path}.{tag.label} vs pattern {t.tag}"
        if res.path == t.tag.path and tag.label == t.tag.label:
            return Next(
                Config(store, substitute(t.binder, t.scrutinee, t.then_branch)),
                StepInfo("Case-Then", _short(t), depth, scr.rules, note),
            )
        return Next(
            Config(store, t.else_branch),
            StepInfo("Case-Else", _short(t), depth, scr.rules, note),
        )

    return _stuck(t, "no reduction rule covers this term form", ())


def applicable_rules(cfg: Config, lookup_fuel: int = 10000) -> list[str]:
    """Names of the non-Ctx rules whose guards hold at the evaluation focus.

    Used to check determinism: stepping succeeds exactly when one rule fires.
    The Let-Value freshness premise counts as holding modulo renaming.
    """
    store, t = cfg.store, _focus(cfg.store, cfg.term)
    out = []
    if isinstance(t, Path):
        if isinstance(lookup_step(store, t), LookupPath):
            out.append("Resolve")
    elif isinstance(t, Apply):
        head = lookup_step(store, t.fun)
        if (
            isinstance(head, LookupValue)
            and isinstance(head.value, Lambda)
            and is_resolved(store, t.arg)
        ):
            out.append("Apply")
    elif isinstance(t, Let):
        if isinstance(t.bound, Path) and is_resolved(store, t.bound):
            out.append("Let-Path")
        if isinstance(t.bound, Value):
            out.append("Let-Value")
    elif isinstance(t, Case):
        scr = lookup_step(store, t.scrutinee)
        if isinstance(scr, LookupValue) and is_resolved(store, t.tag.path):
            if isinstance(scr.value, Lambda):
                out.append("Case-Lambda")
            elif isinstance(scr.value, ObjectVal):
                tag, res = _resolve_tag(store, scr.value, t.scrutinee, lookup_fuel)
                if isinstance(res, Resolution):
                    matches = res.path == t.tag.path and tag.label == t.tag.label
                    out.append("Case-Then" if matches else "Case-Else")
    return out


def _focus(store: Store, t: Term) -> Term:
    """Walk the evaluation-context grammar down to the position being reduced."""
    if isinstance(t, Apply):
        if not is_resolved(store, t.fun) and isinstance(
            lookup_step(store, t.fun), LookupPath
        ):
            return t.fun
        if is_resolved(store, t.fun) and not is_resolved(store, t.arg):
            r = lookup_step(store, t.arg)
            if isinstance(r, LookupPath):
                return t.arg
        return t
    if isinstance(t, Let):
        if isinstance(t.bound, (Path, Value)):
            if isinstance(t.bound, Path) and not is_resolved(store, t.bound):
                r = lookup_step(store, t.bound)
                if isinstance(r, LookupPath):
                    return t.bound
            return t
        return _focus(store, t.bound)
    if isinstance(t, Case):
        if not is_resolved(store, t.scrutinee):
            r = lookup_step(store, t.scrutinee)
            if isinstance(r, LookupPath):
                return t.scrutinee
            return t
        if not is_resolved(store, t.tag.path):
            r = lookup_step(store, t.tag.path)
            if isinstance(r, LookupPath):
                return t.tag.path
        return t
    return t


# ---------------------------------------------------------------- evaluation


@dataclass(frozen=True)
class Finished:
    store: Store
    normal_form: Term
    kind: str
    steps: int
    trace: tuple[StepInfo, ...]


@dataclass(frozen=True)
class OutOfFuel:
    last: Config
    steps: int
    what: str
    trace: tuple[StepInfo, ...]


@dataclass(frozen=True)
class StuckAt:
    diag: Diagnostic
    last: Config
    steps: int
    trace: tuple[StepInfo, ...]


def evaluate(
    t: Term,
    max_steps: int = 100000,
    lookup_fuel: int = 10000,
    keep_trace: bool = True,
) -> Finished | OutOfFuel | StuckAt:
    """Iterate step from the empty store until a normal form, fuel, or stuckness."""
    cfg = Config(Store(), t)
    trace: list[StepInfo] = []
    steps = 0
    while steps < max_steps:
        r = step(cfg, lookup_fuel)
        if isinstance(r, NormalForm):
            return Finished(cfg.store, cfg.term, r.kind, steps, tuple(trace))
        if isinstance(r, Stuck):
            return StuckAt(r.diag, cfg, steps, tuple(trace))
        if isinstance(r, PremiseFuelOut):
            return OutOfFuel(cfg, steps, r.what, tuple(trace))
        cfg = r.config
        if keep_trace:
            trace.append(r.info)
        steps += 1
    return OutOfFuel(cfg, steps, "step budget exhausted", tuple(trace))


def format_trace(trace: tuple[StepInfo, ...]) -> str:
    lines = []
    for n, info in enumerate(trace):
        lines.append(f"{n} {info.rule} {info.focus}")
    return "\n".join(lines)


def reduction_rules_used(trace: tuple[StepInfo, ...]) -> set[str]:
    used: set[str] = set()
    for info in trace:
        used |= info.rules_used()
    return used


# ------------------------------------------------------- store environments


def store_environment(store: Store, session=None):
    """Type each stored value in order and bind it, for preservation checks.

    Returns (env, None) on success or (partial env, diagnostic) on failure.
    """
    from cdot.members import EMPTY_ENV, Session
    from cdot.typecheck import Typed, type_term

    if session is None:
        session = Session()
    env = EMPTY_ENV
    for name, value in store.bindings:
        r = type_term(env, value, session)
        if not isinstance(r, Typed):
            return env, r.diag
        env = env.extend(name, r.ty)
    return env, None
