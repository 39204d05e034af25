"""Translation from the annotated GADT language into the path-dependent calculus.

Types go through `encode_type`, terms through `encode_term`, and a whole
signature becomes two runtime objects: a library of shared primitives and an
environment object holding one type member, one record interface, and one
constructor field per data declaration.  `encode_program` wraps a closed
term with both objects and normalizes the result so every application has
path operands.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from cdot.diagnostics import (
    CTOR_ARITY_MISMATCH,
    DUPLICATE_NAME,
    Diagnostic,
    NON_EXHAUSTIVE_MATCH,
    SCRUTINEE_NOT_GADT,
    UNBOUND_TYPE_VARIABLE,
    UNBOUND_VARIABLE,
    UNKNOWN_CONSTRUCTOR,
)
from cdot.gadt import (
    Applied,
    Arrow,
    Construct,
    CtorSig,
    Fix,
    ForallTy,
    Fst,
    GApp,
    GLam,
    GTerm,
    GTuple,
    GType,
    GVar,
    GadtSig,
    LetIn,
    MatchGadt,
    Product,
    Signature,
    Snd,
    TyApp,
    TyLam,
    TyVar,
    UnitTy,
    UnitVal,
)
from cdot.syntax import (
    AndDef,
    Apply,
    BOT,
    Case,
    Definition,
    FieldDecl,
    FieldDef,
    Forall,
    FreshNames,
    Lambda,
    Let,
    ObjectVal,
    Path,
    Projection,
    Rec,
    Singleton,
    Term,
    TOP,
    Type,
    TypeDecl,
    TypeDef,
    and_defs,
    and_types,
    defs_seq,
    free_vars,
    is_stable,
    term_label,
    type_label,
    var,
)

LIB = "lib"
ENV = "env"

# Binder names that appear inside generated member types; reserving them in
# the shared supply keeps source-program binders from ever colliding.
_RESERVED = {LIB, ENV, "s", "ts", "r", "arg", "h", "w"}


class EncodeError(Exception):
    """Raised when a source program cannot be translated."""

    def __init__(self, diagnostic: Diagnostic):
        super().__init__(diagnostic.message)
        self.diagnostic = diagnostic


def _err(code: str, message: str, subject: str = "") -> None:
    raise EncodeError(Diagnostic(code, message, subject=subject))


# ---------------------------------------------------------------- images


@dataclass(frozen=True)
class Theta:
    """Translation images for the type and term variables in scope."""

    types: tuple[tuple[str, Type], ...] = ()
    terms: tuple[tuple[str, Term], ...] = ()

    def with_type(self, name: str, ty: Type) -> Theta:
        return Theta(self.types + ((name, ty),), self.terms)

    def with_term(self, name: str, image: Term) -> Theta:
        return Theta(self.types, self.terms + ((name, image),))

    def type_image(self, name: str) -> Type:
        for n, ty in reversed(self.types):
            if n == name:
                return ty
        _err(UNBOUND_TYPE_VARIABLE, f"type variable {name} has no image", name)

    def term_image(self, name: str) -> Term:
        for n, t in reversed(self.terms):
            if n == name:
                return t
        _err(UNBOUND_VARIABLE, f"variable {name} has no image", name)


EMPTY_THETA = Theta()


# ---------------------------------------------------------------- helpers


def _tight(name: str, ty: Type) -> TypeDecl:
    return TypeDecl(type_label(name), ty, ty)


def _opaque(name: str) -> TypeDecl:
    return TypeDecl(type_label(name), BOT, TOP)


def _fld(name: str, ty: Type) -> FieldDecl:
    return FieldDecl(term_label(name), ty)


def _proj(p: Path, name: str) -> Projection:
    return Projection(p, type_label(name))


def _b_name(j: int) -> str:
    return f"B{j + 1}"


def _a_name(j: int) -> str:
    return f"A{j + 1}"


def _record_name(ctor: str) -> str:
    return f"T_{ctor}"


def _fresh_supply(sig: Signature) -> FreshNames:
    avoid = set(_RESERVED)
    for cname in sig.ctors:
        avoid.add(f"case_{cname}")
    return FreshNames(avoid)


@dataclass(frozen=True)
class _PreApply(Term):
    """Application whose operands may still be arbitrary terms."""

    fun: Term
    arg: Term


def _pre_apps(fun: Term, *args: Term) -> Term:
    t = fun
    for a in args:
        t = _PreApply(t, a)
    return t


# ---------------------------------------------------------------- library


def library_value() -> ObjectVal:
    """The shared runtime library: unit, pairs, and the top tag."""
    s, tl, x1, x2 = "s", "tl", "x1", "x2"
    unit_iface = _opaque("U")
    pair_mu = Rec(s, and_types([
        _opaque("T1"),
        _opaque("T2"),
        _fld("fst", _proj(var(s), "T1")),
        _fld("snd", _proj(var(s), "T2")),
    ]))
    pair_params = and_types([_opaque("T1"), _opaque("T2")])
    pair_result = and_types([
        _proj(var(LIB), "Tuple"),
        _tight("T1", _proj(var(tl), "T1")),
        _tight("T2", _proj(var(tl), "T2")),
    ])
    decl = and_types([
        _tight("Any", TOP),
        _tight("Unit", unit_iface),
        _fld("unit", Rec(s, _tight("U", TOP))),
        _tight("Tuple", pair_mu),
        _fld("tuple", Forall(tl, pair_params,
                             Forall(x1, _proj(var(tl), "T1"),
                                    Forall(x2, _proj(var(tl), "T2"), pair_result)))),
    ])
    unit_val = ObjectVal(s, _tight("U", TOP), _proj(var(LIB), "Unit"),
                         and_defs([TypeDef(type_label("U"), TOP)]))
    pair_self = and_types([
        _tight("T1", _proj(var(tl), "T1")),
        _tight("T2", _proj(var(tl), "T2")),
        _fld("fst", Singleton(var(x1))),
        _fld("snd", Singleton(var(x2))),
    ])
    pair_defs = and_defs([
        TypeDef(type_label("T1"), _proj(var(tl), "T1")),
        TypeDef(type_label("T2"), _proj(var(tl), "T2")),
        FieldDef(term_label("fst"), var(x1)),
        FieldDef(term_label("snd"), var(x2)),
    ])
    pair_fun = Lambda(tl, pair_params,
                      Lambda(x1, _proj(var(tl), "T1"),
                             Lambda(x2, _proj(var(tl), "T2"),
                                    Let(s, ObjectVal(s, pair_self,
                                                     _proj(var(LIB), "Tuple"),
                                                     pair_defs),
                                        var(s)))))
    defs = and_defs([
        TypeDef(type_label("Any"), TOP),
        TypeDef(type_label("Unit"), unit_iface),
        FieldDef(term_label("unit"), unit_val),
        TypeDef(type_label("Tuple"), pair_mu),
        FieldDef(term_label("tuple"), pair_fun),
    ])
    return ObjectVal(LIB, decl, _proj(var(LIB), "Any"), defs)


# ---------------------------------------------------------------- types


def encode_type(tau: GType, theta: Theta, names: FreshNames | None = None) -> Type:
    """Image of a source type under the variable images in theta."""
    if names is None:
        names = FreshNames(set(_RESERVED))
    if isinstance(tau, TyVar):
        return theta.type_image(tau.name)
    if isinstance(tau, UnitTy):
        return _proj(var(LIB), "Unit")
    if isinstance(tau, Product):
        return and_types([
            _proj(var(LIB), "Tuple"),
            _tight("T1", encode_type(tau.left, theta, names)),
            _tight("T2", encode_type(tau.right, theta, names)),
        ])
    if isinstance(tau, Arrow):
        x = names.fresh("x")
        return Forall(x, encode_type(tau.param, theta, names),
                      encode_type(tau.result, theta, names))
    if isinstance(tau, Applied):
        parts: list[Type] = [_proj(var(ENV), tau.name)]
        for j, arg in enumerate(tau.args):
            parts.append(_tight(_a_name(j), encode_type(arg, theta, names)))
        return and_types(parts)
    if isinstance(tau, ForallTy):
        x = names.fresh(f"x_{tau.var}")
        inner = theta.with_type(tau.var, _proj(var(x), "T"))
        return Forall(x, _opaque("T"), encode_type(tau.body, inner, names))
    raise TypeError(f"unrecognized source type {tau!r}")


# ---------------------------------------------------------------- signature


def _anchored(ctor: CtorSig, anchor: str) -> Theta:
    """Type-variable images reading the B members off one anchor path."""
    th = EMPTY_THETA
    for j, beta in enumerate(ctor.ty_params):
        th = th.with_type(beta, _proj(var(anchor), _b_name(j)))
    return th


def _dispatch_type(gsig: GadtSig, subject: Path) -> Type:
    """The pmatch member type: one continuation per constructor."""
    result = _proj(var("r"), "R")
    ty: Type = result
    for ctor in reversed(gsig.ctors):
        accepts = and_types([_proj(var(ENV), _record_name(ctor.name)),
                             Singleton(subject)])
        ty = Forall(f"case_{ctor.name}", Forall("arg", accepts, result), ty)
    return Forall("r", _opaque("R"), ty)


def _gadt_member(gsig: GadtSig) -> Rec:
    parts: list[Type] = [_opaque(_a_name(j)) for j in range(gsig.arity)]
    parts.append(_fld("pmatch", _dispatch_type(gsig, var("s"))))
    return Rec("s", and_types(parts))


def _record_member(gsig: GadtSig, ctor: CtorSig, names: FreshNames) -> Rec:
    th = _anchored(ctor, "s")
    parts: list[Type] = [_proj(var(ENV), gsig.name)]
    parts.extend(_opaque(_b_name(j)) for j in range(len(ctor.ty_params)))
    parts.extend(_tight(_a_name(j), encode_type(sigma, th, names))
                 for j, sigma in enumerate(ctor.result_args))
    parts.append(_fld("data", encode_type(ctor.arg_ty, th, names)))
    return Rec("s", and_types(parts))


def _ctor_param_iface(ctor: CtorSig) -> Type:
    bs = [_opaque(_b_name(j)) for j in range(len(ctor.ty_params))]
    return and_types(bs) if bs else TOP


def _ctor_decl(gsig: GadtSig, ctor: CtorSig, names: FreshNames) -> Forall:
    th = _anchored(ctor, "ts")
    result_parts: list[Type] = [_proj(var(ENV), gsig.name)]
    result_parts.extend(_tight(_a_name(j), encode_type(sigma, th, names))
                        for j, sigma in enumerate(ctor.result_args))
    return Forall("ts", _ctor_param_iface(ctor),
                  Forall("v", encode_type(ctor.arg_ty, th, names),
                         and_types(result_parts)))


def _ctor_value(gsig: GadtSig, ctor: CtorSig, names: FreshNames) -> Lambda:
    th_s = _anchored(ctor, "s")
    self_parts: list[Type] = []
    def_parts: list[Definition] = []
    for j in range(len(ctor.ty_params)):
        image = _proj(var("ts"), _b_name(j))
        self_parts.append(_tight(_b_name(j), image))
        def_parts.append(TypeDef(type_label(_b_name(j)), image))
    for j, sigma in enumerate(ctor.result_args):
        image = encode_type(sigma, th_s, names)
        self_parts.append(_tight(_a_name(j), image))
        def_parts.append(TypeDef(type_label(_a_name(j)), image))
    self_parts.append(_fld("data", Singleton(var("v"))))
    def_parts.append(FieldDef(term_label("data"), var("v")))
    self_parts.append(_fld("pmatch", _dispatch_type(gsig, var("s"))))

    witness = ObjectVal("w", _fld("z", Singleton(var("s"))),
                        _proj(var(LIB), "Any"),
                        and_defs([FieldDef(term_label("z"), var("s"))]))
    dispatch_core: Term = Let("h", witness,
                              Apply(var(f"case_{ctor.name}"), var("h").sel("z")))
    dispatch: Term = dispatch_core
    result = _proj(var("r"), "R")
    for other in reversed(gsig.ctors):
        accepts = and_types([_proj(var(ENV), _record_name(other.name)),
                             Singleton(var("s"))])
        dispatch = Lambda(f"case_{other.name}", Forall("arg", accepts, result),
                          dispatch)
    def_parts.append(FieldDef(term_label("pmatch"),
                              Lambda("r", _opaque("R"), dispatch)))

    payload = ObjectVal("s", and_types(self_parts),
                        _proj(var(ENV), _record_name(ctor.name)),
                        and_defs(def_parts))
    th_ts = _anchored(ctor, "ts")
    return Lambda("ts", _ctor_param_iface(ctor),
                  Lambda("v", encode_type(ctor.arg_ty, th_ts, names),
                         Let("s", payload, var("s"))))


def encode_signature(sig: Signature,
                     names: FreshNames | None = None) -> tuple[ObjectVal, ObjectVal]:
    """Both runtime objects for a signature: the library and the environment."""
    if names is None:
        names = _fresh_supply(sig)
    type_labels: set[str] = set()
    decls: list[Type] = []
    defs: list[Definition] = []
    for gname in sig.gadt_names():
        gsig = sig.gadts[gname]
        for label in [gname] + [_record_name(c.name) for c in gsig.ctors]:
            if label in type_labels:
                _err(DUPLICATE_NAME,
                     f"environment member {label} is defined twice", label)
            type_labels.add(label)
        member = _gadt_member(gsig)
        decls.append(_tight(gname, member))
        defs.append(TypeDef(type_label(gname), member))
        for ctor in gsig.ctors:
            record = _record_member(gsig, ctor, names)
            decls.append(_tight(_record_name(ctor.name), record))
            defs.append(TypeDef(type_label(_record_name(ctor.name)), record))
            decls.append(_fld(ctor.name, _ctor_decl(gsig, ctor, names)))
            defs.append(FieldDef(term_label(ctor.name),
                                 _ctor_value(gsig, ctor, names)))
    self_ty = and_types(decls) if decls else TOP
    env_val = ObjectVal(ENV, self_ty, _proj(var(LIB), "Any"), and_defs(defs))
    return library_value(), env_val


# ---------------------------------------------------------------- terms


def _ctor_sig(sig: Signature, name: str) -> CtorSig:
    ctor = sig.ctors.get(name)
    if ctor is None:
        _err(UNKNOWN_CONSTRUCTOR, f"constructor {name} is not declared", name)
    return ctor


def encode_term(e: GTerm, theta: Theta, sig: Signature,
                names: FreshNames | None = None) -> Term:
    """Image of a source term; the result may need `anf_normalize`."""
    if names is None:
        names = _fresh_supply(sig)
    return _enc(e, theta, sig, names)


def _enc(e: GTerm, theta: Theta, sig: Signature, names: FreshNames) -> Term:
    if isinstance(e, GVar):
        return theta.term_image(e.name)
    if isinstance(e, UnitVal):
        return var(LIB).sel("unit")
    if isinstance(e, GTuple):
        v1 = names.fresh("v")
        v2 = names.fresh("v")
        tl = names.fresh("tl")
        t1 = encode_type(e.left_ty, theta, names)
        t2 = encode_type(e.right_ty, theta, names)
        params = ObjectVal(tl, and_types([_tight("T1", t1), _tight("T2", t2)]),
                           _proj(var(LIB), "Any"),
                           and_defs([TypeDef(type_label("T1"), t1),
                                     TypeDef(type_label("T2"), t2)]))
        return Let(v1, _enc(e.left, theta, sig, names),
                   Let(v2, _enc(e.right, theta, sig, names),
                       _pre_apps(var(LIB).sel("tuple"), params,
                                 var(v1), var(v2))))
    if isinstance(e, Fst):
        v = names.fresh("v")
        return Let(v, _enc(e.arg, theta, sig, names), var(v).sel("fst"))
    if isinstance(e, Snd):
        v = names.fresh("v")
        return Let(v, _enc(e.arg, theta, sig, names), var(v).sel("snd"))
    if isinstance(e, GLam):
        x = names.fresh(e.param)
        inner = theta.with_term(e.param, var(x))
        return Lambda(x, encode_type(e.param_ty, theta, names),
                      _enc(e.body, inner, sig, names))
    if isinstance(e, GApp):
        v1 = names.fresh("v")
        v2 = names.fresh("v")
        return Let(v1, _enc(e.fun, theta, sig, names),
                   Let(v2, _enc(e.arg, theta, sig, names),
                       Apply(var(v1), var(v2))))
    if isinstance(e, TyLam):
        x = names.fresh(f"x_{e.var}")
        inner = theta.with_type(e.var, _proj(var(x), "T"))
        return Lambda(x, _opaque("T"), _enc(e.body, inner, sig, names))
    if isinstance(e, TyApp):
        tl = names.fresh("tl")
        ty = encode_type(e.ty, theta, names)
        params = ObjectVal(tl, _tight("T", ty), _proj(var(LIB), "Any"),
                           and_defs([TypeDef(type_label("T"), ty)]))
        return Let(tl, params, _pre_apps(_enc(e.fun, theta, sig, names), var(tl)))
    if isinstance(e, Fix):
        hlp = names.fresh("hlpObj")
        self_n = names.fresh("self")
        u = names.fresh("u")
        unit_ty = _proj(var(LIB), "Unit")
        recur = _PreApply(var(self_n).sel("fix"), var(LIB).sel("unit"))
        body = _enc(e.body, theta.with_term(e.name, recur), sig, names)
        result_ty = encode_type(e.ty, theta, names)
        obj = ObjectVal(self_n, _fld("fix", Forall(u, unit_ty, result_ty)),
                        _proj(var(LIB), "Any"),
                        and_defs([FieldDef(term_label("fix"),
                                           Lambda(u, unit_ty, body))]))
        return Let(hlp, obj, _pre_apps(var(hlp).sel("fix"), var(LIB).sel("unit")))
    if isinstance(e, LetIn):
        x = names.fresh(e.var)
        inner = theta.with_term(e.var, var(x))
        return Let(x, _enc(e.bound, theta, sig, names),
                   _enc(e.body, inner, sig, names))
    if isinstance(e, Construct):
        ctor = _ctor_sig(sig, e.ctor)
        if len(e.ty_args) != len(ctor.ty_params):
            _err(CTOR_ARITY_MISMATCH,
                 f"constructor {e.ctor} takes {len(ctor.ty_params)} type "
                 f"arguments, got {len(e.ty_args)}", e.ctor)
        ts = names.fresh("ts")
        v = names.fresh("v")
        self_parts: list[Type] = []
        def_parts: list[Definition] = []
        for j, ty_arg in enumerate(e.ty_args):
            image = encode_type(ty_arg, theta, names)
            self_parts.append(_tight(_b_name(j), image))
            def_parts.append(TypeDef(type_label(_b_name(j)), image))
        params = ObjectVal(ts, and_types(self_parts) if self_parts else TOP,
                           _proj(var(LIB), "Any"), and_defs(def_parts))
        return Let(ts, params,
                   Let(v, _enc(e.arg, theta, sig, names),
                       _pre_apps(var(ENV).sel(e.ctor), var(ts), var(v))))
    if isinstance(e, MatchGadt):
        return _enc_match(e, theta, sig, names)
    raise TypeError(f"unrecognized source term {e!r}")


def _enc_match(e: MatchGadt, theta: Theta, sig: Signature,
               names: FreshNames) -> Term:
    gsig = sig.gadts.get(e.gadt_name)
    if gsig is None:
        _err(SCRUTINEE_NOT_GADT,
             f"match names unknown data type {e.gadt_name}", e.gadt_name)
    by_name = {br.ctor: br for br in e.branches}
    if len(by_name) != len(e.branches):
        _err(NON_EXHAUSTIVE_MATCH,
             "match repeats a constructor branch", e.gadt_name)
    declared = {c.name for c in gsig.ctors}
    for br in e.branches:
        if br.ctor not in declared:
            _err(UNKNOWN_CONSTRUCTOR,
                 f"branch constructor {br.ctor} does not belong to "
                 f"{e.gadt_name}", br.ctor)
    missing = declared - set(by_name)
    if missing:
        _err(NON_EXHAUSTIVE_MATCH,
             f"match is missing branches for {sorted(missing)}", e.gadt_name)

    tl = names.fresh("tl")
    ret = encode_type(e.returning, theta, names)
    params = ObjectVal(tl, _tight("R", ret), _proj(var(LIB), "Any"),
                       and_defs([TypeDef(type_label("R"), ret)]))
    v = names.fresh("v")
    case_vars: list[str] = []
    case_lams: list[tuple[str, Lambda]] = []
    for ctor in gsig.ctors:
        br = by_name[ctor.name]
        if len(br.ty_vars) != len(ctor.ty_params):
            _err(CTOR_ARITY_MISMATCH,
                 f"branch for {ctor.name} binds {len(br.ty_vars)} type "
                 f"variables, expected {len(ctor.ty_params)}", ctor.name)
        arg = names.fresh("arg")
        x = names.fresh(br.var)
        cn = names.fresh(f"case_{ctor.name}")
        inner = theta
        for j, beta in enumerate(br.ty_vars):
            inner = inner.with_type(beta, _proj(var(arg), _b_name(j)))
        inner = inner.with_term(br.var, var(x))
        accepts = and_types([_proj(var(ENV), _record_name(ctor.name)),
                             Singleton(var(v))])
        lam = Lambda(arg, accepts,
                     Let(x, var(arg).sel("data"),
                         _enc(br.body, inner, sig, names)))
        case_vars.append(cn)
        case_lams.append((cn, lam))

    core: Term = _pre_apps(var(v).sel("pmatch"), var(tl),
                           *[var(cn) for cn in case_vars])
    for cn, lam in reversed(case_lams):
        core = Let(cn, lam, core)
    return Let(tl, params, Let(v, _enc(e.scrutinee, theta, sig, names), core))


# ---------------------------------------------------------------- programs


def encode_program(e: GTerm, sig: Signature) -> Term:
    """A closed program wrapped with the library and environment bindings."""
    names = _fresh_supply(sig)
    lib_val, env_val = encode_signature(sig, names)
    body = encode_term(e, EMPTY_THETA, sig, names)
    return anf_normalize(Let(LIB, lib_val, Let(ENV, env_val, body)), names)


def anf_normalize(t: Term, names: FreshNames) -> Term:
    """Lift every non-path application operand into its own let binding."""
    if isinstance(t, _PreApply):
        lets: list[tuple[str, Term]] = []
        fun = _operand(anf_normalize(t.fun, names), lets, names)
        arg = _operand(anf_normalize(t.arg, names), lets, names)
        out: Term = Apply(fun, arg)
        for n, b in reversed(lets):
            out = Let(n, b, out)
        return out
    if isinstance(t, Let):
        return Let(t.var, anf_normalize(t.bound, names),
                   anf_normalize(t.body, names))
    if isinstance(t, Lambda):
        return replace(t, body=anf_normalize(t.body, names))
    if isinstance(t, Case):
        return replace(t, then_branch=anf_normalize(t.then_branch, names),
                       else_branch=anf_normalize(t.else_branch, names))
    if isinstance(t, ObjectVal):
        return replace(t, defs=_anf_defs(t.defs, names))
    return t


def _operand(t: Term, lets: list[tuple[str, Term]], names: FreshNames) -> Path:
    if isinstance(t, Path):
        return t
    n = names.fresh("k")
    lets.append((n, t))
    return var(n)


def _anf_defs(d: Definition, names: FreshNames) -> Definition:
    if isinstance(d, AndDef):
        return AndDef(_anf_defs(d.left, names), _anf_defs(d.right, names))
    if isinstance(d, FieldDef) and isinstance(d.rhs, (Lambda, ObjectVal)):
        return FieldDef(d.label, anf_normalize(d.rhs, names))
    return d


def is_anf(t: Term) -> bool:
    """True when every application operand is a path and fields are stable."""
    if isinstance(t, _PreApply):
        return False
    if isinstance(t, Path):
        return True
    if isinstance(t, Apply):
        return isinstance(t.fun, Path) and isinstance(t.arg, Path)
    if isinstance(t, Let):
        return is_anf(t.bound) and is_anf(t.body)
    if isinstance(t, Lambda):
        return is_anf(t.body)
    if isinstance(t, Case):
        return is_anf(t.then_branch) and is_anf(t.else_branch)
    if isinstance(t, ObjectVal):
        for d in defs_seq(t.defs):
            if isinstance(d, FieldDef):
                if not is_stable(d.rhs) or not is_anf(d.rhs):
                    return False
        return True
    return False


# ---------------------------------------------------------------- checking


def image_environment(sig: Signature, session=None):
    """A type environment binding lib and env at their synthesized types.

    Encoded open terms are typed under this environment, so their types can
    mention the library and environment members.
    """
    from cdot.members import EMPTY_ENV, Session
    from cdot.typecheck import type_term

    session = session or Session()
    lib_val, env_val = encode_signature(sig)
    tenv = EMPTY_ENV
    for name, value in ((LIB, lib_val), (ENV, env_val)):
        typed = type_term(tenv, value, session)
        if not hasattr(typed, "ty"):
            raise EncodeError(typed.diag)
        tenv = tenv.extend(name, typed.ty)
    return tenv


# ---------------------------------------------------------------- equality


def types_equal(env, a: Type, b: Type, session=None) -> bool:
    """Mutual subtyping under env; fuel exhaustion counts as inequality."""
    from cdot.subtyping import IllFormedPathError, Yes, reconstruct_bounds, subtype
    from cdot.members import Session

    session = session or Session()
    try:
        bounds = reconstruct_bounds(env, session)
        lo = subtype(env, bounds, a, b, session=session)
        if not isinstance(lo, Yes):
            return False
        hi = subtype(env, bounds, b, a, session=session)
        return isinstance(hi, Yes)
    except IllFormedPathError:
        return False


# ---------------------------------------------------------------- readback


def readback(store, nf: Term) -> Term:
    """The bindings a normal form depends on, restored as nested lets."""
    reachable = set(free_vars(nf))
    kept: list[tuple[str, Term]] = []
    for name, value in reversed(store.bindings):
        if name in reachable:
            kept.append((name, value))
            reachable |= free_vars(value)
    out = nf
    for name, value in kept:
        out = Let(name, value, out)
    return out


def results_correspond(fin_a, fin_b) -> bool:
    """Alpha-comparison of two evaluation results after store readback."""
    from cdot.syntax import alpha_equal

    return alpha_equal(readback(fin_a.store, fin_a.normal_form),
                       readback(fin_b.store, fin_b.normal_form))


# ---------------------------------------------------------------- decoding


def value_shape(store, p: Path, sig: Signature, fuel: int = 10000):
    """First-order skeleton of a stored value: unit, pairs, constructors.

    Functions are opaque and decode to ("fun",); anything unrecognizable
    decodes to None.
    """
    from cdot.machine import Resolution, resolve
    from cdot.syntax import substitute

    record_ctors = {_record_name(c): c for c in sig.ctors}
    res = resolve(store, p, fuel)
    if not isinstance(res, Resolution):
        return None
    value = res.value
    if isinstance(value, Lambda):
        return ("fun",)
    tag = substitute(value.self_name, res.path, value.tag)
    if not isinstance(tag, Projection):
        return None
    label = tag.label.name
    if tag.path == var(LIB):
        if label == "Unit":
            return ("unit",)
        if label == "Tuple":
            return ("tuple",
                    value_shape(store, res.path.sel("fst"), sig, fuel),
                    value_shape(store, res.path.sel("snd"), sig, fuel))
        return None
    if tag.path == var(ENV) and label in record_ctors:
        return ("ctor", record_ctors[label],
                value_shape(store, res.path.sel("data"), sig, fuel))
    return None


def g_value_shape(v: GTerm):
    """First-order skeleton of a source-language value."""
    if isinstance(v, UnitVal):
        return ("unit",)
    if isinstance(v, GTuple):
        return ("tuple", g_value_shape(v.left), g_value_shape(v.right))
    if isinstance(v, Construct):
        return ("ctor", v.ctor, g_value_shape(v.arg))
    if isinstance(v, (GLam, TyLam, Fix)):
        return ("fun",)
    return None
