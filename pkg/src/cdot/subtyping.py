"""Algorithmic subtyping: structural rules, projection bounds, inversion.

Transitivity is never searched blindly; it materializes through alias
canonicalization, projection bound hops, and a reconstructed bound map.
The bound map is seeded from the type members visible on each binding and
closed under a transitive pairing step, decomposing derived assumptions
with the inversion rules.  All search is fuel bounded and three valued.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import ILL_FORMED_PATH, Diagnostic
from .members import (
    Session,
    TypeEnv,
    FuelError,
    alias_rep,
    canonicalize_type,
    decl_bounds,
    member_facts,
    same_identity,
    wf_path_reason,
)
from .syntax import (
    And,
    Bot,
    FieldDecl,
    Forall,
    Label,
    Path,
    Projection,
    Rec,
    Singleton,
    Top,
    Type,
    TypeDecl,
    alpha_equal,
    fresh_name,
    free_vars,
    substitute,
    var,
)

# ---------------------------------------------------------------- traces


@dataclass(frozen=True)
class MemberEvidence:
    """Leaf evidence: decl is in the member set of path."""

    path: Path
    decl: Type


@dataclass(frozen=True)
class AliasEvidence:
    """Leaf evidence: the two paths share an alias class."""

    lhs: Path
    rhs: Path


@dataclass(frozen=True)
class SubTrace:
    """One subtyping derivation node: rule name, conclusion, premises."""

    rule: str
    lhs: Type
    rhs: Type
    premises: tuple = ()
    note: str = ""


def trace_rules(tr) -> set[str]:
    """All rule names mentioned in a trace tree."""
    out: set[str] = set()
    stack = [tr]
    while stack:
        n = stack.pop()
        if isinstance(n, SubTrace):
            out.add(n.rule)
            stack.extend(n.premises)
        elif hasattr(n, "premises"):
            if getattr(n, "rule", None):
                out.add(n.rule)
            stack.extend(n.premises)
    return out


def trace_nodes(tr):
    """Flatten a trace tree into its rule-bearing nodes."""
    out = []
    stack = [tr]
    while stack:
        n = stack.pop()
        if isinstance(n, SubTrace) or hasattr(n, "premises"):
            out.append(n)
            stack.extend(getattr(n, "premises", ()))
    return out


# ---------------------------------------------------------------- results


@dataclass(frozen=True)
class Yes:
    trace: SubTrace


@dataclass(frozen=True)
class No:
    reason: str = ""


@dataclass(frozen=True)
class FuelOut:
    what: str = "subtyping"


class IllFormedPathError(Exception):
    def __init__(self, diag: Diagnostic):
        self.diag = diag
        super().__init__(diag.message)


# ---------------------------------------------------------------- unique membership


def _label_set(ty: Type) -> frozenset[Label] | None:
    if isinstance(ty, (TypeDecl, FieldDecl)):
        return frozenset([ty.label])
    if isinstance(ty, Rec):
        return frozenset()
    if isinstance(ty, And):
        l = _label_set(ty.left)
        r = _label_set(ty.right)
        if l is None or r is None or (l & r):
            return None
        return l | r
    return None


def _um_leaves(ty: Type) -> list[tuple[Type, str]]:
    if isinstance(ty, TypeDecl):
        return [(ty, "One-Typ")]
    if isinstance(ty, FieldDecl):
        return [(ty, "One-Fld")]
    if isinstance(ty, Rec):
        return [(ty, "One-Rec")]
    if isinstance(ty, And):
        left = [(u, f"And-Left({r})") for u, r in _um_leaves(ty.left)]
        right = [(u, f"And-Right({r})") for u, r in _um_leaves(ty.right)]
        return left + right
    return []


def unique_member(ty: Type) -> set[tuple[Type, frozenset[Label]]]:
    """Every conjunct extractable from ty with ty's full (distinct) label set.

    An intersection with duplicate labels, or containing a conjunct without
    membership structure (functions, projections, singletons, top, bottom),
    yields nothing.
    """
    ls = _label_set(ty)
    if ls is None:
        return set()
    return {(u, ls) for u, _ in _um_leaves(ty)}


def unique_member_rules(ty: Type) -> list[tuple[Type, str]]:
    """Leaves paired with the extraction rule chain, for trace notes."""
    if _label_set(ty) is None:
        return []
    return _um_leaves(ty)


def _um_trace(ty: Type) -> list[tuple[Type, SubTrace]]:
    """Leaves paired with nested extraction-rule trace nodes."""
    if _label_set(ty) is None:
        return []

    def go(t: Type) -> list[tuple[Type, SubTrace]]:
        if isinstance(t, TypeDecl):
            return [(t, SubTrace("One-Typ", t, t))]
        if isinstance(t, FieldDecl):
            return [(t, SubTrace("One-Fld", t, t))]
        if isinstance(t, Rec):
            return [(t, SubTrace("One-Rec", t, t))]
        if isinstance(t, And):
            out = [(u, SubTrace("And-Left", t, u, (n,))) for u, n in go(t.left)]
            out += [(u, SubTrace("And-Right", t, u, (n,))) for u, n in go(t.right)]
            return out
        return []

    return go(ty)


# ---------------------------------------------------------------- bound map


@dataclass(frozen=True)
class Assumption:
    lhs: Type
    rhs: Type


@dataclass
class BoundMap:
    """Lower/upper bounds per abstract type, plus undecomposable residue."""

    lowers: dict[Type, list[tuple[Type, SubTrace]]] = field(default_factory=dict)
    uppers: dict[Type, list[tuple[Type, SubTrace]]] = field(default_factory=dict)
    residue: list[tuple[Assumption, SubTrace]] = field(default_factory=list)
    fuel_warning: bool = False

    def lower(self, key: Type) -> list[tuple[Type, SubTrace]]:
        return self.lowers.get(key, [])

    def upper(self, key: Type) -> list[tuple[Type, SubTrace]]:
        return self.uppers.get(key, [])

    def entries(self) -> dict[Type, tuple[list[Type], list[Type]]]:
        keys = set(self.lowers) | set(self.uppers)
        return {
            k: (
                [t for t, _ in self.lowers.get(k, [])],
                [t for t, _ in self.uppers.get(k, [])],
            )
            for k in keys
        }

    def _add(self, side: str, key: Type, ty: Type, just: SubTrace) -> bool:
        store = self.lowers if side == "lower" else self.uppers
        lst = store.setdefault(key, [])
        anchor = _trace_anchor(just)
        if any(alpha_equal(ty, t) and _trace_anchor(j) == anchor for t, j in lst):
            return False
        lst.append((ty, just))
        return True


EMPTY_BOUNDS = BoundMap()


def _is_abstract(ty: Type) -> bool:
    return isinstance(ty, (Projection, Singleton))


def _trace_anchor(just: SubTrace) -> Type | None:
    """The written abstract type a justification pivots on, if any."""
    if just.rule == "<:-Sel" and _is_abstract(just.rhs):
        return just.rhs
    if just.rule == "Sel-<:" and _is_abstract(just.lhs):
        return just.lhs
    if just.rule == "Trans":
        for p in just.premises:
            if isinstance(p, SubTrace):
                a = _trace_anchor(p)
                if a is not None:
                    return a
    return None


def _dec(env: TypeEnv, S: Type, T: Type, just: SubTrace, bm: BoundMap, ops: list[int]) -> bool:
    """Decompose one assumption into bound entries; returns whether anything
    new was recorded."""
    if ops[0] <= 0:
        raise FuelError("bounds reconstruction")
    ops[0] -= 1
    if alpha_equal(S, T):
        return False
    if isinstance(T, Top) or isinstance(S, Bot):
        return False
    changed = False
    if _is_abstract(S) or _is_abstract(T):
        if _is_abstract(S) and _is_abstract(T) \
                and alpha_equal(canonicalize_type(env, S), canonicalize_type(env, T)):
            return False
        if _is_abstract(S):
            changed |= bm._add("upper", canonicalize_type(env, S), T, just)
        if _is_abstract(T):
            changed |= bm._add("lower", canonicalize_type(env, T), S, just)
        return changed
    if isinstance(T, And):
        jl = SubTrace("Trans", S, T.left, (just, SubTrace("And1-<:", T, T.left)))
        jr = SubTrace("Trans", S, T.right, (just, SubTrace("And2-<:", T, T.right)))
        changed |= _dec(env, S, T.left, jl, bm, ops)
        changed |= _dec(env, S, T.right, jr, bm, ops)
        return changed
    if isinstance(S, FieldDecl) and isinstance(T, FieldDecl) and S.label == T.label:
        j = SubTrace("Fld-<:-Fld-Inv", S.ty, T.ty, (just,))
        return _dec(env, S.ty, T.ty, j, bm, ops)
    if isinstance(S, TypeDecl) and isinstance(T, TypeDecl) and S.label == T.label:
        j1 = SubTrace("Typ-<:-Typ-Inv1", T.lo, S.lo, (just,))
        j2 = SubTrace("Typ-<:-Typ-Inv2", S.hi, T.hi, (just,))
        changed |= _dec(env, T.lo, S.lo, j1, bm, ops)
        changed |= _dec(env, S.hi, T.hi, j2, bm, ops)
        return changed
    if isinstance(S, And) and isinstance(T, (FieldDecl, TypeDecl)):
        for u, um_node in _um_trace(S):
            if isinstance(T, FieldDecl) and isinstance(u, FieldDecl) and u.label == T.label:
                j = SubTrace("Fld-<:-Fld-Inv", u.ty, T.ty, (just, um_node))
                return _dec(env, u.ty, T.ty, j, bm, ops)
            if isinstance(T, TypeDecl) and isinstance(u, TypeDecl) and u.label == T.label:
                j1 = SubTrace("Typ-<:-Typ-Inv1", T.lo, u.lo, (just, um_node))
                j2 = SubTrace("Typ-<:-Typ-Inv2", u.hi, T.hi, (just, um_node))
                changed |= _dec(env, T.lo, u.lo, j1, bm, ops)
                changed |= _dec(env, u.hi, T.hi, j2, bm, ops)
                return changed
        bm.residue.append((Assumption(S, T), just))
        return False
    bm.residue.append((Assumption(S, T), just))
    return False


def decompose(assumption: Assumption, env: TypeEnv | None = None) -> list[tuple[Type, str, Type]]:
    """Decompose one assumption; entries as (abstract type, side, bound)."""
    env = env or TypeEnv()
    bm = BoundMap()
    just = SubTrace("Hyp", assumption.lhs, assumption.rhs)
    _dec(env, assumption.lhs, assumption.rhs, just, bm, [4096])
    out = []
    for k, lst in bm.lowers.items():
        out.extend((k, "lower", t) for t, _ in lst)
    for k, lst in bm.uppers.items():
        out.extend((k, "upper", t) for t, _ in lst)
    return out


def reconstruct_bounds(env: TypeEnv, session: Session | None = None) -> BoundMap:
    """Seed bound assumptions from every binding's visible type members and
    close under the transitive pairing step, decomposing as it goes."""
    if env._bounds is not None:
        return env._bounds
    session = session or Session()
    bm = BoundMap()
    ops = [session.recon_ops]
    try:
        for name, _ in reversed(env.bindings):
            x = var(name)
            try:
                facts = member_facts(env, x, session)
            except FuelError:
                bm.fuel_warning = True
                continue
            for f in facts:
                if not isinstance(f, TypeDecl):
                    continue
                key = Projection(x, f.label)
                ev = MemberEvidence(x, f)
                if not isinstance(f.lo, Bot):
                    j = SubTrace("<:-Sel", f.lo, key, (ev,))
                    _dec(env, f.lo, key, j, bm, ops)
                if not isinstance(f.hi, Top):
                    j = SubTrace("Sel-<:", key, f.hi, (ev,))
                    _dec(env, key, f.hi, j, bm, ops)
        seen: set[tuple] = set()
        changed = True
        while changed:
            changed = False
            keys = list(set(bm.lowers) | set(bm.uppers))
            for key in keys:
                for L, jL in list(bm.lower(key)):
                    anchor = _trace_anchor(jL)
                    ups = sorted(
                        bm.upper(key),
                        key=lambda e: 0 if _trace_anchor(e[1]) == anchor else 1,
                    )
                    for U, jU in ups:
                        pk = (key, L, U, anchor, _trace_anchor(jU))
                        if pk in seen:
                            continue
                        seen.add(pk)
                        if alpha_equal(L, U):
                            continue
                        j = SubTrace("Trans", L, U, (jL, jU))
                        if _dec(env, L, U, j, bm, ops):
                            changed = True
    except FuelError:
        bm.fuel_warning = True
    env._bounds = bm
    return bm


# ---------------------------------------------------------------- subtyping


class _Ctx:
    def __init__(self, env: TypeEnv, bounds: BoundMap, session: Session, fuel: list[int]):
        self.env = env
        self.bounds = bounds
        self.session = session
        self.fuel = fuel
        self.stack: set[tuple[Type, Type]] = set()
        self.no_memo: set[tuple[Type, Type]] = set()

    def child(self, env: TypeEnv) -> "_Ctx":
        return _Ctx(env, reconstruct_bounds(env, self.session), self.session, self.fuel)


def _free_paths(ty: Type, bound: frozenset[str] = frozenset()) -> list[Path]:
    if isinstance(ty, (Top, Bot)):
        return []
    if isinstance(ty, FieldDecl):
        return _free_paths(ty.ty, bound)
    if isinstance(ty, TypeDecl):
        return _free_paths(ty.lo, bound) + _free_paths(ty.hi, bound)
    if isinstance(ty, And):
        return _free_paths(ty.left, bound) + _free_paths(ty.right, bound)
    if isinstance(ty, Rec):
        return _free_paths(ty.body, bound | {ty.self_name})
    if isinstance(ty, Forall):
        return _free_paths(ty.param_type, bound) + _free_paths(ty.result, bound | {ty.param})
    if isinstance(ty, (Projection, Singleton)):
        return [] if ty.path.root in bound else [ty.path]
    raise TypeError(f"_free_paths: {ty!r}")


def subtype(env: TypeEnv, bounds: BoundMap | None, S: Type, T: Type,
            fuel: int | None = None, session: Session | None = None):
    """Three-valued subtype query; Yes carries a replayable trace."""
    session = session or Session()
    if bounds is None:
        bounds = reconstruct_bounds(env, session)
    for p in _free_paths(S) + _free_paths(T):
        reason = wf_path_reason(env, p, session)
        if reason is not None:
            raise IllFormedPathError(Diagnostic(ILL_FORMED_PATH, reason, subject=str(p)))
    ctx = _Ctx(env, bounds, session, [fuel if fuel is not None else session.subtype_fuel])
    try:
        return _sub(S, T, ctx)
    except FuelError:
        return FuelOut()


def _sub(S: Type, T: Type, ctx: _Ctx):
    env = ctx.env
    key = (S, T)
    cached = env._sub_yes.get(key)
    if cached is not None:
        return cached
    if key in ctx.no_memo or key in ctx.stack:
        return No("assumed in progress" if key in ctx.stack else "memoized failure")
    if ctx.fuel[0] <= 0:
        raise FuelError("subtyping")
    ctx.fuel[0] -= 1
    ctx.stack.add(key)
    try:
        r = _sub_inner(S, T, ctx)
    finally:
        ctx.stack.discard(key)
    if isinstance(r, Yes):
        env._sub_yes[key] = r
    else:
        ctx.no_memo.add(key)
    return r


def _sub_inner(S: Type, T: Type, ctx: _Ctx):
    env, bounds, session = ctx.env, ctx.bounds, ctx.session

    if isinstance(T, Top):
        return Yes(SubTrace("Top", S, T))
    if isinstance(S, Bot):
        return Yes(SubTrace("Bot", S, T))
    if S == T or alpha_equal(S, T):
        return Yes(SubTrace("Refl", S, T))

    cS = canonicalize_type(env, S)
    cT = canonicalize_type(env, T)
    if (cS != S or cT != T) and alpha_equal(cS, cT):
        prem = []
        if cS != S:
            prem.append(SubTrace("Sngl-pq-<:", S, cS, (), note="alias canonicalization"))
        if cT != T:
            prem.append(SubTrace("Sngl-qp-<:", cT, T, (), note="alias canonicalization"))
        if len(prem) == 1:
            only = prem[0]
            return Yes(SubTrace(only.rule, S, T, only.premises, note=only.note))
        return Yes(SubTrace("Trans", S, T, tuple(prem)))

    if isinstance(T, And):
        rl = _sub(S, T.left, ctx)
        if isinstance(rl, Yes):
            rr = _sub(S, T.right, ctx)
            if isinstance(rr, Yes):
                return Yes(SubTrace("<:-And", S, T, (rl.trace, rr.trace)))

    if isinstance(S, And):
        rl = _sub(S.left, T, ctx)
        if isinstance(rl, Yes):
            return Yes(SubTrace("Trans", S, T, (SubTrace("And1-<:", S, S.left), rl.trace)))
        rr = _sub(S.right, T, ctx)
        if isinstance(rr, Yes):
            return Yes(SubTrace("Trans", S, T, (SubTrace("And2-<:", S, S.right), rr.trace)))

    if isinstance(S, FieldDecl) and isinstance(T, FieldDecl) and S.label == T.label:
        r = _sub(S.ty, T.ty, ctx)
        if isinstance(r, Yes):
            return Yes(SubTrace("Fld-<:-Fld", S, T, (r.trace,)))

    if isinstance(S, TypeDecl) and isinstance(T, TypeDecl) and S.label == T.label:
        rlo = _sub(T.lo, S.lo, ctx)
        if isinstance(rlo, Yes):
            rhi = _sub(S.hi, T.hi, ctx)
            if isinstance(rhi, Yes):
                return Yes(SubTrace("Typ-<:-Typ", S, T, (rlo.trace, rhi.trace)))

    if isinstance(S, Forall) and isinstance(T, Forall):
        rp = _sub(T.param_type, S.param_type, ctx)
        if isinstance(rp, Yes):
            avoid = env.names() | free_vars(S) | free_vars(T)
            z = fresh_name(T.param if T.param not in env.names() else "z", avoid)
            s_res = substitute(S.param, var(z), S.result)
            t_res = substitute(T.param, var(z), T.result)
            env2 = env.extend(z, T.param_type)
            rb = _sub(s_res, t_res, ctx.child(env2))
            if isinstance(rb, Yes):
                return Yes(SubTrace("All-<:-All", S, T, (rp.trace, rb.trace)))

    if isinstance(T, Projection):
        try:
            pairs = decl_bounds(env, T.path, T.label, session)
        except FuelError:
            pairs = []
        for lo, hi in pairs:
            r = _sub(S, lo, ctx)
            if isinstance(r, Yes):
                sel = SubTrace("<:-Sel", lo, T, (MemberEvidence(T.path, TypeDecl(T.label, lo, hi)),))
                return Yes(SubTrace("Trans", S, T, (r.trace, sel)))
        for L, jL in bounds.lower(canonicalize_type(env, T)):
            r = _sub(S, L, ctx)
            if isinstance(r, Yes):
                return Yes(SubTrace("Trans", S, T, (r.trace, jL)))

    if isinstance(S, Projection):
        try:
            pairs = decl_bounds(env, S.path, S.label, session)
        except FuelError:
            pairs = []
        for lo, hi in pairs:
            r = _sub(hi, T, ctx)
            if isinstance(r, Yes):
                sel = SubTrace("Sel-<:", S, hi, (MemberEvidence(S.path, TypeDecl(S.label, lo, hi)),))
                return Yes(SubTrace("Trans", S, T, (sel, r.trace)))
        for U, jU in bounds.upper(canonicalize_type(env, S)):
            r = _sub(U, T, ctx)
            if isinstance(r, Yes):
                return Yes(SubTrace("Trans", S, T, (jU, r.trace)))

    if isinstance(S, Singleton):
        for U, jU in bounds.upper(canonicalize_type(env, S)):
            r = _sub(U, T, ctx)
            if isinstance(r, Yes):
                return Yes(SubTrace("Trans", S, T, (jU, r.trace)))
        try:
            facts = member_facts(env, S.path, session)
        except FuelError:
            facts = []
        for F in facts:
            if isinstance(F, Singleton) and same_identity(env, F.path, S.path):
                continue
            r = _sub(F, T, ctx)
            if isinstance(r, Yes):
                widen = SubTrace("Sngl-Trans", S, F, (MemberEvidence(S.path, F),))
                return Yes(SubTrace("Trans", S, T, (widen, r.trace)))

    if isinstance(T, Singleton):
        for L, jL in bounds.lower(canonicalize_type(env, T)):
            r = _sub(S, L, ctx)
            if isinstance(r, Yes):
                return Yes(SubTrace("Trans", S, T, (r.trace, jL)))

    for assum, just in bounds.residue:
        if alpha_equal(assum.lhs, S) and alpha_equal(assum.rhs, T):
            return Yes(SubTrace("Trans", S, T, (just,), note="residue assumption"))

    return No(f"no rule derives {S} <: {T}")
