"""A small GADT language: annotated syntax, equation entailment, checker, stepper.

The language has unit, annotated pairs, functions, universals, fix, let,
GADT constructors and a flat exhaustive matchgadt form.  Reduction is
deterministic call by value.  Constraint entailment deliberately lacks
ex falso and arrow/forall inversion.
"""
from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import (
    ANNOTATION_MISMATCH,
    APPLIED_ARITY_MISMATCH,
    ARGUMENT_MISMATCH,
    CTOR_ARITY_MISMATCH,
    ELIMINATION_MISMATCH,
    NON_EXHAUSTIVE_MATCH,
    SCRUTINEE_NOT_GADT,
    UNBOUND_TYPE_VARIABLE,
    UNBOUND_VARIABLE,
    UNKNOWN_CONSTRUCTOR,
    Diagnostic,
)

# ---------------------------------------------------------------- types


class GType:
    def __str__(self) -> str:
        from . import surface

        return surface.format_gtype(self)


@dataclass(frozen=True)
class TyVar(GType):
    name: str


@dataclass(frozen=True)
class UnitTy(GType):
    pass


UNIT_TY = UnitTy()


@dataclass(frozen=True)
class Product(GType):
    left: GType
    right: GType


@dataclass(frozen=True)
class Arrow(GType):
    param: GType
    result: GType


@dataclass(frozen=True)
class ForallTy(GType):
    var: str
    body: GType


@dataclass(frozen=True)
class Applied(GType):
    """(args) Name, a fully applied GADT type constructor."""

    args: tuple[GType, ...]
    name: str


# ---------------------------------------------------------------- terms


class GTerm:
    def __str__(self) -> str:
        from . import surface

        return surface.format_gterm(self)


@dataclass(frozen=True)
class GVar(GTerm):
    name: str


@dataclass(frozen=True)
class UnitVal(GTerm):
    pass


UNIT = UnitVal()


@dataclass(frozen=True)
class GTuple(GTerm):
    """Annotated pair: both component types are written in the source."""

    left: GTerm
    left_ty: GType
    right: GTerm
    right_ty: GType


@dataclass(frozen=True)
class Fst(GTerm):
    arg: GTerm


@dataclass(frozen=True)
class Snd(GTerm):
    arg: GTerm


@dataclass(frozen=True)
class GLam(GTerm):
    param: str
    param_ty: GType
    body: GTerm


@dataclass(frozen=True)
class GApp(GTerm):
    fun: GTerm
    arg: GTerm


@dataclass(frozen=True)
class TyLam(GTerm):
    var: str
    body: GTerm


@dataclass(frozen=True)
class TyApp(GTerm):
    fun: GTerm
    ty: GType


@dataclass(frozen=True)
class Fix(GTerm):
    name: str
    ty: GType
    body: GTerm


@dataclass(frozen=True)
class LetIn(GTerm):
    var: str
    bound: GTerm
    body: GTerm


@dataclass(frozen=True)
class Construct(GTerm):
    """c[tyArgs](arg); values of this shape remember their type arguments."""

    ctor: str
    ty_args: tuple[GType, ...]
    arg: GTerm


@dataclass(frozen=True)
class Branch:
    ctor: str
    ty_vars: tuple[str, ...]
    var: str
    body: GTerm


@dataclass(frozen=True)
class MatchGadt(GTerm):
    scrutinee: GTerm
    gadt_name: str
    returning: GType
    branches: tuple[Branch, ...]


# ---------------------------------------------------------------- signatures


@dataclass(frozen=True)
class CtorSig:
    """One constructor: c has type forall ty_params. arg_ty -> (result_args) gadt."""

    name: str
    ty_params: tuple[str, ...]
    arg_ty: GType
    result_args: tuple[GType, ...]
    gadt: str


@dataclass(frozen=True)
class GadtSig:
    name: str
    arity: int
    ctors: tuple[CtorSig, ...]


class Signature:
    """All GADT declarations of one program; ctor and type names are unique."""

    def __init__(self, gadts: list[GadtSig]):
        self.gadts: dict[str, GadtSig] = {}
        self.ctors: dict[str, CtorSig] = {}
        for g in gadts:
            if g.name in self.gadts:
                raise ValueError(f"duplicate GADT name {g.name}")
            self.gadts[g.name] = g
            for c in g.ctors:
                if c.name in self.ctors:
                    raise ValueError(f"duplicate constructor name {c.name}")
                self.ctors[c.name] = c

    def gadt_names(self) -> list[str]:
        return list(self.gadts)


EMPTY_SIGNATURE = Signature([])


# ---------------------------------------------------------------- constraint context


@dataclass(frozen=True)
class TyVarDecl:
    name: str


@dataclass(frozen=True)
class Equation:
    lhs: GType
    rhs: GType


ConstraintCtx = tuple  # of TyVarDecl | Equation


# ---------------------------------------------------------------- type utilities


def gtype_free_vars(ty: GType) -> set[str]:
    if isinstance(ty, TyVar):
        return {ty.name}
    if isinstance(ty, UnitTy):
        return set()
    if isinstance(ty, Product):
        return gtype_free_vars(ty.left) | gtype_free_vars(ty.right)
    if isinstance(ty, Arrow):
        return gtype_free_vars(ty.param) | gtype_free_vars(ty.result)
    if isinstance(ty, ForallTy):
        return gtype_free_vars(ty.body) - {ty.var}
    if isinstance(ty, Applied):
        out: set[str] = set()
        for a in ty.args:
            out |= gtype_free_vars(a)
        return out
    raise TypeError(f"gtype_free_vars: {ty!r}")


def _gfresh(base: str, avoid: set[str]) -> str:
    if base not in avoid:
        return base
    k = 1
    while f"{base}{k}" in avoid:
        k += 1
    return f"{base}{k}"


def subst_gtype(mapping: dict[str, GType], ty: GType) -> GType:
    """Capture-avoiding simultaneous substitution on a type."""
    if not mapping:
        return ty
    if isinstance(ty, TyVar):
        return mapping.get(ty.name, ty)
    if isinstance(ty, UnitTy):
        return ty
    if isinstance(ty, Product):
        return Product(subst_gtype(mapping, ty.left), subst_gtype(mapping, ty.right))
    if isinstance(ty, Arrow):
        return Arrow(subst_gtype(mapping, ty.param), subst_gtype(mapping, ty.result))
    if isinstance(ty, ForallTy):
        inner = {k: v for k, v in mapping.items() if k != ty.var}
        if not inner:
            return ty
        clash = set()
        for v in inner.values():
            clash |= gtype_free_vars(v)
        var = ty.var
        body = ty.body
        if var in clash:
            nv = _gfresh(var, clash | gtype_free_vars(body) | set(inner))
            body = subst_gtype({var: TyVar(nv)}, body)
            var = nv
        return ForallTy(var, subst_gtype(inner, body))
    if isinstance(ty, Applied):
        return Applied(tuple(subst_gtype(mapping, a) for a in ty.args), ty.name)
    raise TypeError(f"subst_gtype: {ty!r}")


def gtype_alpha_equal(a: GType, b: GType, m1: dict | None = None, m2: dict | None = None) -> bool:
    m1 = m1 or {}
    m2 = m2 or {}
    if type(a) is not type(b):
        return False
    if isinstance(a, TyVar):
        if a.name in m1 or b.name in m2:
            return m1.get(a.name) == b.name and m2.get(b.name) == a.name
        return a.name == b.name
    if isinstance(a, UnitTy):
        return True
    if isinstance(a, Product):
        return gtype_alpha_equal(a.left, b.left, m1, m2) and gtype_alpha_equal(a.right, b.right, m1, m2)
    if isinstance(a, Arrow):
        return gtype_alpha_equal(a.param, b.param, m1, m2) and gtype_alpha_equal(a.result, b.result, m1, m2)
    if isinstance(a, ForallTy):
        n1 = dict(m1)
        n2 = dict(m2)
        n1[a.var] = b.var
        n2[b.var] = a.var
        return gtype_alpha_equal(a.body, b.body, n1, n2)
    if isinstance(a, Applied):
        if a.name != b.name or len(a.args) != len(b.args):
            return False
        return all(gtype_alpha_equal(x, y, m1, m2) for x, y in zip(a.args, b.args))
    raise TypeError(f"gtype_alpha_equal: {a!r}")


def subst_term_types(mapping: dict[str, GType], e: GTerm) -> GTerm:
    """Substitute type variables throughout a term's annotations and bodies."""
    if not mapping:
        return e
    s = lambda t: subst_gtype(mapping, t)
    if isinstance(e, (GVar, UnitVal)):
        return e
    if isinstance(e, GTuple):
        return GTuple(subst_term_types(mapping, e.left), s(e.left_ty),
                      subst_term_types(mapping, e.right), s(e.right_ty))
    if isinstance(e, Fst):
        return Fst(subst_term_types(mapping, e.arg))
    if isinstance(e, Snd):
        return Snd(subst_term_types(mapping, e.arg))
    if isinstance(e, GLam):
        return GLam(e.param, s(e.param_ty), subst_term_types(mapping, e.body))
    if isinstance(e, GApp):
        return GApp(subst_term_types(mapping, e.fun), subst_term_types(mapping, e.arg))
    if isinstance(e, TyLam):
        inner = {k: v for k, v in mapping.items() if k != e.var}
        clash = set()
        for v in inner.values():
            clash |= gtype_free_vars(v)
        var, body = e.var, e.body
        if var in clash:
            nv = _gfresh(var, clash | set(inner))
            body = subst_term_types({var: TyVar(nv)}, body)
            var = nv
        return TyLam(var, subst_term_types(inner, body))
    if isinstance(e, TyApp):
        return TyApp(subst_term_types(mapping, e.fun), s(e.ty))
    if isinstance(e, Fix):
        return Fix(e.name, s(e.ty), subst_term_types(mapping, e.body))
    if isinstance(e, LetIn):
        return LetIn(e.var, subst_term_types(mapping, e.bound), subst_term_types(mapping, e.body))
    if isinstance(e, Construct):
        return Construct(e.ctor, tuple(s(t) for t in e.ty_args), subst_term_types(mapping, e.arg))
    if isinstance(e, MatchGadt):
        brs = []
        for br in e.branches:
            inner = {k: v for k, v in mapping.items() if k not in br.ty_vars}
            brs.append(Branch(br.ctor, br.ty_vars, br.var, subst_term_types(inner, br.body)))
        return MatchGadt(subst_term_types(mapping, e.scrutinee), e.gadt_name, s(e.returning), tuple(brs))
    raise TypeError(f"subst_term_types: {e!r}")


def term_free_vars(e: GTerm) -> set[str]:
    if isinstance(e, GVar):
        return {e.name}
    if isinstance(e, UnitVal):
        return set()
    if isinstance(e, GTuple):
        return term_free_vars(e.left) | term_free_vars(e.right)
    if isinstance(e, (Fst, Snd)):
        return term_free_vars(e.arg)
    if isinstance(e, GLam):
        return term_free_vars(e.body) - {e.param}
    if isinstance(e, GApp):
        return term_free_vars(e.fun) | term_free_vars(e.arg)
    if isinstance(e, TyLam):
        return term_free_vars(e.body)
    if isinstance(e, TyApp):
        return term_free_vars(e.fun)
    if isinstance(e, Fix):
        return term_free_vars(e.body) - {e.name}
    if isinstance(e, LetIn):
        return term_free_vars(e.bound) | (term_free_vars(e.body) - {e.var})
    if isinstance(e, Construct):
        return term_free_vars(e.arg)
    if isinstance(e, MatchGadt):
        out = term_free_vars(e.scrutinee)
        for br in e.branches:
            out |= term_free_vars(br.body) - {br.var}
        return out
    raise TypeError(f"term_free_vars: {e!r}")


def subst_term_var(x: str, val: GTerm, e: GTerm) -> GTerm:
    """Capture-avoiding substitution of a term for a term variable."""
    if isinstance(e, GVar):
        return val if e.name == x else e
    if isinstance(e, UnitVal):
        return e
    if isinstance(e, GTuple):
        return GTuple(subst_term_var(x, val, e.left), e.left_ty,
                      subst_term_var(x, val, e.right), e.right_ty)
    if isinstance(e, Fst):
        return Fst(subst_term_var(x, val, e.arg))
    if isinstance(e, Snd):
        return Snd(subst_term_var(x, val, e.arg))
    if isinstance(e, GLam):
        if e.param == x:
            return e
        param, body = _avoid_term_capture(e.param, e.body, val, x)
        return GLam(param, e.param_ty, subst_term_var(x, val, body))
    if isinstance(e, GApp):
        return GApp(subst_term_var(x, val, e.fun), subst_term_var(x, val, e.arg))
    if isinstance(e, TyLam):
        return TyLam(e.var, subst_term_var(x, val, e.body))
    if isinstance(e, TyApp):
        return TyApp(subst_term_var(x, val, e.fun), e.ty)
    if isinstance(e, Fix):
        if e.name == x:
            return e
        name, body = _avoid_term_capture(e.name, e.body, val, x)
        return Fix(name, e.ty, subst_term_var(x, val, body))
    if isinstance(e, LetIn):
        bound = subst_term_var(x, val, e.bound)
        if e.var == x:
            return LetIn(e.var, bound, e.body)
        v, body = _avoid_term_capture(e.var, e.body, val, x)
        return LetIn(v, bound, subst_term_var(x, val, body))
    if isinstance(e, Construct):
        return Construct(e.ctor, e.ty_args, subst_term_var(x, val, e.arg))
    if isinstance(e, MatchGadt):
        brs = []
        for br in e.branches:
            if br.var == x:
                brs.append(br)
                continue
            v, body = _avoid_term_capture(br.var, br.body, val, x)
            brs.append(Branch(br.ctor, br.ty_vars, v, subst_term_var(x, val, body)))
        return MatchGadt(subst_term_var(x, val, e.scrutinee), e.gadt_name, e.returning, tuple(brs))
    raise TypeError(f"subst_term_var: {e!r}")


def _avoid_term_capture(binder: str, body: GTerm, val: GTerm, x: str):
    if binder in term_free_vars(val):
        nb = _gfresh(binder, term_free_vars(val) | term_free_vars(body) | {x})
        body = subst_term_var(binder, GVar(nb), body)
        binder = nb
    return binder, body


# ---------------------------------------------------------------- entailment


def normalize_constraints(delta: ConstraintCtx):
    """Normalize a constraint context into a substitution plus inert equations.

    Repeatedly: decompose GADT/product equations componentwise, eliminate
    variable equations by substitution (occurs-checked, either orientation,
    restarting the scan after each elimination), drop equations whose sides
    are already equal.  Whatever remains is inert; arrow and forall
    equations never decompose.  Inert equations stay inert under later
    substitutions (their head constructors cannot change), so one pass over
    them per elimination keeps the list coherent.
    """
    work = [(e.lhs, e.rhs) for e in delta if isinstance(e, Equation)]
    sigma: dict[str, GType] = {}
    inert: list[Equation] = []
    i = 0
    while i < len(work):
        lhs, rhs = work[i]
        if gtype_alpha_equal(lhs, rhs):
            work.pop(i)
            continue
        if isinstance(lhs, Applied) and isinstance(rhs, Applied):
            if lhs.name == rhs.name and len(lhs.args) == len(rhs.args):
                work[i:i + 1] = list(zip(lhs.args, rhs.args))
            else:
                inert.append(Equation(lhs, rhs))
                work.pop(i)
            continue
        if isinstance(lhs, Product) and isinstance(rhs, Product):
            work[i:i + 1] = [(lhs.left, rhs.left), (lhs.right, rhs.right)]
            continue
        pick = None
        if isinstance(lhs, TyVar) and lhs.name not in gtype_free_vars(rhs):
            pick = (lhs.name, rhs)
        elif isinstance(rhs, TyVar) and rhs.name not in gtype_free_vars(lhs):
            pick = (rhs.name, lhs)
        if pick is not None:
            name, image = pick
            one = {name: image}
            sigma = {k: subst_gtype(one, v) for k, v in sigma.items()}
            sigma[name] = image
            work.pop(i)
            work = [(subst_gtype(one, a), subst_gtype(one, b)) for a, b in work]
            inert = [Equation(subst_gtype(one, e.lhs), subst_gtype(one, e.rhs)) for e in inert]
            i = 0
            continue
        inert.append(Equation(lhs, rhs))
        work.pop(i)
    return sigma, inert


def entails(delta: ConstraintCtx, t1: GType, t2: GType) -> bool:
    """True iff the equations of delta force t1 and t2 equal, without
    arrow/forall inversion or ex falso reasoning."""
    sigma, _ = normalize_constraints(delta)
    return gtype_alpha_equal(subst_gtype(sigma, t1), subst_gtype(sigma, t2))


# ---------------------------------------------------------------- type checking


@dataclass(frozen=True)
class GTyped:
    ty: GType


@dataclass(frozen=True)
class GErr:
    diag: Diagnostic


def _declared_vars(delta: ConstraintCtx) -> set[str]:
    return {d.name for d in delta if isinstance(d, TyVarDecl)}


def gtype_wf(delta_vars: set[str], sig: Signature, ty: GType) -> Diagnostic | None:
    """Kind check: free variables declared, applied names known at their arity."""
    for v in sorted(gtype_free_vars(ty)):
        if v not in delta_vars:
            return Diagnostic(UNBOUND_TYPE_VARIABLE, f"type variable {v} is not in scope")
    return _applied_wf(sig, ty)


def _applied_wf(sig: Signature, ty: GType) -> Diagnostic | None:
    if isinstance(ty, Applied):
        g = sig.gadts.get(ty.name)
        if g is None:
            return Diagnostic(SCRUTINEE_NOT_GADT, f"unknown GADT type {ty.name}")
        if g.arity != len(ty.args):
            return Diagnostic(
                APPLIED_ARITY_MISMATCH,
                f"{ty.name} expects {g.arity} type arguments, got {len(ty.args)}",
            )
        for a in ty.args:
            d = _applied_wf(sig, a)
            if d is not None:
                return d
        return None
    if isinstance(ty, Product):
        return _applied_wf(sig, ty.left) or _applied_wf(sig, ty.right)
    if isinstance(ty, Arrow):
        return _applied_wf(sig, ty.param) or _applied_wf(sig, ty.result)
    if isinstance(ty, ForallTy):
        return _applied_wf(sig, ty.body)
    return None


def g_typecheck(delta: ConstraintCtx, pi: dict[str, GType], sig: Signature, e: GTerm):
    """Synthesize a type for e, or return a structured error.

    Equality reasoning fires only at elimination and annotation sites:
    synthesized types are first normalized through the constraint
    substitution, then compared modulo entails.
    """
    try:
        ty = _synth(delta, _declared_vars(delta), dict(pi), sig, e)
    except _GFail as f:
        return GErr(f.diag)
    return GTyped(ty)


class _GFail(Exception):
    def __init__(self, diag: Diagnostic):
        self.diag = diag


def _fail(code: str, message: str, **kw):
    raise _GFail(Diagnostic(code, message, **kw))


def _norm(delta: ConstraintCtx, ty: GType) -> GType:
    sigma, _ = normalize_constraints(delta)
    return subst_gtype(sigma, ty)


def _check_eq(delta: ConstraintCtx, actual: GType, expected: GType, code: str, what: str):
    if not entails(delta, actual, expected):
        _fail(code, f"{what}: types do not agree", expected=str(expected), actual=str(actual))


def _synth(delta: ConstraintCtx, tyvars: set[str], pi: dict[str, GType], sig: Signature, e: GTerm) -> GType:
    if isinstance(e, GVar):
        if e.name not in pi:
            _fail(UNBOUND_VARIABLE, f"variable {e.name} is not in scope")
        return pi[e.name]
    if isinstance(e, UnitVal):
        return UNIT_TY
    if isinstance(e, GTuple):
        for ann in (e.left_ty, e.right_ty):
            d = gtype_wf(tyvars, sig, ann)
            if d:
                raise _GFail(d)
        lt = _synth(delta, tyvars, pi, sig, e.left)
        _check_eq(delta, lt, e.left_ty, ANNOTATION_MISMATCH, "tuple component 1")
        rt = _synth(delta, tyvars, pi, sig, e.right)
        _check_eq(delta, rt, e.right_ty, ANNOTATION_MISMATCH, "tuple component 2")
        return Product(e.left_ty, e.right_ty)
    if isinstance(e, Fst):
        t = _norm(delta, _synth(delta, tyvars, pi, sig, e.arg))
        if not isinstance(t, Product):
            _fail(ELIMINATION_MISMATCH, "fst applied to a non-product", actual=str(t))
        return t.left
    if isinstance(e, Snd):
        t = _norm(delta, _synth(delta, tyvars, pi, sig, e.arg))
        if not isinstance(t, Product):
            _fail(ELIMINATION_MISMATCH, "snd applied to a non-product", actual=str(t))
        return t.right
    if isinstance(e, GLam):
        d = gtype_wf(tyvars, sig, e.param_ty)
        if d:
            raise _GFail(d)
        inner = dict(pi)
        inner[e.param] = e.param_ty
        rt = _synth(delta, tyvars, inner, sig, e.body)
        return Arrow(e.param_ty, rt)
    if isinstance(e, GApp):
        ft = _norm(delta, _synth(delta, tyvars, pi, sig, e.fun))
        if not isinstance(ft, Arrow):
            _fail(ELIMINATION_MISMATCH, "application head is not a function", actual=str(ft))
        at = _synth(delta, tyvars, pi, sig, e.arg)
        _check_eq(delta, at, ft.param, ARGUMENT_MISMATCH, "argument")
        return ft.result
    if isinstance(e, TyLam):
        v, body = e.var, e.body
        if v in tyvars:
            nv = _gfresh(v, tyvars)
            body = subst_term_types({v: TyVar(nv)}, body)
            v = nv
        bt = _synth(delta + (TyVarDecl(v),), tyvars | {v}, pi, sig, body)
        return ForallTy(v, bt)
    if isinstance(e, TyApp):
        d = gtype_wf(tyvars, sig, e.ty)
        if d:
            raise _GFail(d)
        ft = _norm(delta, _synth(delta, tyvars, pi, sig, e.fun))
        if not isinstance(ft, ForallTy):
            _fail(ELIMINATION_MISMATCH, "type application head is not universal", actual=str(ft))
        return subst_gtype({ft.var: e.ty}, ft.body)
    if isinstance(e, Fix):
        d = gtype_wf(tyvars, sig, e.ty)
        if d:
            raise _GFail(d)
        inner = dict(pi)
        inner[e.name] = e.ty
        bt = _synth(delta, tyvars, inner, sig, e.body)
        _check_eq(delta, bt, e.ty, ANNOTATION_MISMATCH, "fix body")
        return e.ty
    if isinstance(e, LetIn):
        bt = _synth(delta, tyvars, pi, sig, e.bound)
        inner = dict(pi)
        inner[e.var] = bt
        return _synth(delta, tyvars, inner, sig, e.body)
    if isinstance(e, Construct):
        c = sig.ctors.get(e.ctor)
        if c is None:
            _fail(UNKNOWN_CONSTRUCTOR, f"unknown constructor {e.ctor}")
        if len(e.ty_args) != len(c.ty_params):
            _fail(
                CTOR_ARITY_MISMATCH,
                f"{e.ctor} expects {len(c.ty_params)} type arguments, got {len(e.ty_args)}",
            )
        for a in e.ty_args:
            d = gtype_wf(tyvars, sig, a)
            if d:
                raise _GFail(d)
        theta = dict(zip(c.ty_params, e.ty_args))
        at = _synth(delta, tyvars, pi, sig, e.arg)
        _check_eq(delta, at, subst_gtype(theta, c.arg_ty), ARGUMENT_MISMATCH, f"payload of {e.ctor}")
        return Applied(tuple(subst_gtype(theta, s) for s in c.result_args), c.gadt)
    if isinstance(e, MatchGadt):
        g = sig.gadts.get(e.gadt_name)
        if g is None:
            _fail(SCRUTINEE_NOT_GADT, f"unknown GADT type {e.gadt_name}")
        st = _norm(delta, _synth(delta, tyvars, pi, sig, e.scrutinee))
        if not isinstance(st, Applied) or st.name != e.gadt_name:
            _fail(
                SCRUTINEE_NOT_GADT,
                f"scrutinee does not have an applied {e.gadt_name} type",
                actual=str(st),
            )
        d = gtype_wf(tyvars, sig, e.returning)
        if d:
            raise _GFail(d)
        seen: set[str] = set()
        for br in e.branches:
            if br.ctor in seen:
                _fail(NON_EXHAUSTIVE_MATCH, f"duplicate branch for constructor {br.ctor}")
            seen.add(br.ctor)
            c = sig.ctors.get(br.ctor)
            if c is None or c.gadt != e.gadt_name:
                _fail(UNKNOWN_CONSTRUCTOR, f"{br.ctor} is not a constructor of {e.gadt_name}")
        missing = [c.name for c in g.ctors if c.name not in seen]
        if missing:
            _fail(NON_EXHAUSTIVE_MATCH, f"missing branches: {', '.join(missing)}")
        for br in e.branches:
            c = sig.ctors[br.ctor]
            if len(br.ty_vars) != len(c.ty_params):
                _fail(
                    CTOR_ARITY_MISMATCH,
                    f"branch {br.ctor} binds {len(br.ty_vars)} type variables, "
                    f"constructor declares {len(c.ty_params)}",
                )
            # rename branch binders that clash with variables already in scope
            bvars = list(br.ty_vars)
            body = br.body
            rename: dict[str, GType] = {}
            for i, bv in enumerate(bvars):
                if bv in tyvars or bv in rename:
                    nv = _gfresh(bv, tyvars | set(bvars) | set(rename))
                    rename[bv] = TyVar(nv)
                    bvars[i] = nv
            if rename:
                body = subst_term_types(rename, body)
            theta = dict(zip(c.ty_params, (TyVar(v) for v in bvars)))
            extra = [TyVarDecl(v) for v in bvars]
            eqs = [
                Equation(subst_gtype(theta, s), d_arg)
                for s, d_arg in zip(c.result_args, st.args)
            ]
            delta2 = delta + tuple(extra) + tuple(eqs)
            pi2 = dict(pi)
            pi2[br.var] = subst_gtype(theta, c.arg_ty)
            bt = _synth(delta2, tyvars | set(bvars), pi2, sig, body)
            _check_eq(delta2, bt, e.returning, ANNOTATION_MISMATCH, f"branch {br.ctor}")
        return e.returning
    raise TypeError(f"g_typecheck: unknown term {e!r}")


# ---------------------------------------------------------------- reduction


def is_g_value(e: GTerm) -> bool:
    if isinstance(e, (UnitVal, GLam, TyLam)):
        return True
    if isinstance(e, GTuple):
        return is_g_value(e.left) and is_g_value(e.right)
    if isinstance(e, Construct):
        return is_g_value(e.arg)
    return False


@dataclass(frozen=True)
class GNext:
    term: GTerm
    rule: str


@dataclass(frozen=True)
class GValueResult:
    pass


@dataclass(frozen=True)
class GStuck:
    diag: Diagnostic


def g_step(sig: Signature, e: GTerm):
    """One deterministic call-by-value step; Stuck only on ill-typed terms."""
    if is_g_value(e):
        return GValueResult()
    if isinstance(e, GTuple):
        if not is_g_value(e.left):
            r = g_step(sig, e.left)
            return _inside(r, lambda t: GTuple(t, e.left_ty, e.right, e.right_ty))
        r = g_step(sig, e.right)
        return _inside(r, lambda t: GTuple(e.left, e.left_ty, t, e.right_ty))
    if isinstance(e, Fst):
        if not is_g_value(e.arg):
            return _inside(g_step(sig, e.arg), Fst)
        if isinstance(e.arg, GTuple):
            return GNext(e.arg.left, "fst")
        return GStuck(Diagnostic(ELIMINATION_MISMATCH, "fst of a non-tuple value", subject=str(e)))
    if isinstance(e, Snd):
        if not is_g_value(e.arg):
            return _inside(g_step(sig, e.arg), Snd)
        if isinstance(e.arg, GTuple):
            return GNext(e.arg.right, "snd")
        return GStuck(Diagnostic(ELIMINATION_MISMATCH, "snd of a non-tuple value", subject=str(e)))
    if isinstance(e, GApp):
        if not is_g_value(e.fun):
            return _inside(g_step(sig, e.fun), lambda t: GApp(t, e.arg))
        if not is_g_value(e.arg):
            return _inside(g_step(sig, e.arg), lambda t: GApp(e.fun, t))
        if isinstance(e.fun, GLam):
            return GNext(subst_term_var(e.fun.param, e.arg, e.fun.body), "beta")
        return GStuck(Diagnostic(ELIMINATION_MISMATCH, "application of a non-function value", subject=str(e)))
    if isinstance(e, TyApp):
        if not is_g_value(e.fun):
            return _inside(g_step(sig, e.fun), lambda t: TyApp(t, e.ty))
        if isinstance(e.fun, TyLam):
            return GNext(subst_term_types({e.fun.var: e.ty}, e.fun.body), "tybeta")
        return GStuck(Diagnostic(ELIMINATION_MISMATCH, "type application of a non-universal value", subject=str(e)))
    if isinstance(e, Fix):
        return GNext(subst_term_var(e.name, e, e.body), "fix")
    if isinstance(e, LetIn):
        if not is_g_value(e.bound):
            return _inside(g_step(sig, e.bound), lambda t: LetIn(e.var, t, e.body))
        return GNext(subst_term_var(e.var, e.bound, e.body), "let")
    if isinstance(e, Construct):
        return _inside(g_step(sig, e.arg), lambda t: Construct(e.ctor, e.ty_args, t))
    if isinstance(e, MatchGadt):
        if not is_g_value(e.scrutinee):
            return _inside(
                g_step(sig, e.scrutinee),
                lambda t: MatchGadt(t, e.gadt_name, e.returning, e.branches),
            )
        v = e.scrutinee
        if not isinstance(v, Construct):
            return GStuck(Diagnostic(SCRUTINEE_NOT_GADT, "match on a non-constructor value", subject=str(e)))
        for br in e.branches:
            if br.ctor == v.ctor:
                body = subst_term_types(dict(zip(br.ty_vars, v.ty_args)), br.body)
                return GNext(subst_term_var(br.var, v.arg, body), "match")
        return GStuck(Diagnostic(NON_EXHAUSTIVE_MATCH, f"no branch for {v.ctor}", subject=str(e)))
    return GStuck(Diagnostic(ELIMINATION_MISMATCH, "no reduction rule applies", subject=str(e)))


def _inside(r, rebuild):
    if isinstance(r, GNext):
        return GNext(rebuild(r.term), r.rule)
    return r


@dataclass(frozen=True)
class GFinished:
    value: GTerm
    steps: int


@dataclass(frozen=True)
class GOutOfFuel:
    last: GTerm
    steps: int


def g_evaluate(sig: Signature, e: GTerm, max_steps: int = 100000):
    cur = e
    for n in range(max_steps):
        r = g_step(sig, cur)
        if isinstance(r, GValueResult):
            return GFinished(cur, n)
        if isinstance(r, GStuck):
            return r
        cur = r.term
    return GOutOfFuel(cur, max_steps)
