"""Bidirectional typing for paths, values, and terms.

Synthesis computes precise types: paths get their own singleton type, let
bodies are promoted to drop the bound variable, and objects get recursive
types built from their exact definitions.  Checking is goal directed: a
path is checked against a type by decomposing the goal, falling back to a
subtype query on the path's singleton type.  Wider object interfaces are
recovered at paths, never at values.
"""
from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import (
    ANNOTATION_REQUIRED,
    ARGUMENT_MISMATCH,
    DEFINITION_MISMATCH,
    DUPLICATE_LABEL,
    FIELD_INIT_NOT_STABLE,
    ILL_FORMED_PATH,
    LOOSE_BOUNDS,
    MISSING_MEMBER,
    NOT_A_FUNCTION,
    SUBTYPE_FAILED,
    TAG_NOT_TYPEABLE,
    UNBOUND_VARIABLE,
    Diagnostic,
)
from .members import (
    Session,
    TypeEnv,
    EMPTY_ENV,
    FuelError,
    alias_class_of,
    alias_rep,
    decl_bounds,
    field_decls,
    forall_facts,
    has_bot_fact,
    member_facts,
    member_facts_prov,
    same_identity,
    wf_path_reason,
)
from .subtyping import (
    FuelOut,
    IllFormedPathError,
    No,
    SubTrace,
    Yes,
    _free_paths,
    reconstruct_bounds,
    subtype,
    trace_rules,
)
from .syntax import (
    TOP,
    BOT,
    And,
    AndDef,
    Apply,
    Bot,
    Case,
    FieldDecl,
    FieldDef,
    Forall,
    Lambda,
    Let,
    ObjectVal,
    Path,
    Projection,
    Rec,
    Singleton,
    Term,
    Top,
    Type,
    TypeDecl,
    TypeDef,
    alpha_equal,
    and_types,
    conjuncts,
    def_labels,
    defs_seq,
    free_vars,
    fresh_name,
    is_stable,
    substitute,
    var,
)

# ---------------------------------------------------------------- results


@dataclass(frozen=True)
class TyTrace:
    """One typing derivation node: rule name, subject, assigned type."""

    rule: str
    subject: str
    ty: Type | None
    premises: tuple = ()
    note: str = ""


@dataclass(frozen=True)
class Typed:
    ty: Type
    trace: TyTrace


@dataclass(frozen=True)
class Untyped:
    diag: Diagnostic


class _Fail(Exception):
    def __init__(self, diag: Diagnostic):
        self.diag = diag
        super().__init__(diag.message)


def _fail(code: str, message: str, **kw):
    raise _Fail(Diagnostic(code, message, **kw))


def _short(s, width: int = 72) -> str:
    s = str(s)
    return s if len(s) <= width else s[: width - 3] + "..."


# ---------------------------------------------------------------- helpers


def _wf_type(env: TypeEnv, ty: Type, session: Session):
    for p in _free_paths(ty):
        reason = wf_path_reason(env, p, session)
        if reason is not None:
            code = UNBOUND_VARIABLE if env.lookup(p.root) is None else ILL_FORMED_PATH
            _fail(code, reason, subject=str(p))


def _wf_path(env: TypeEnv, p: Path, session: Session):
    reason = wf_path_reason(env, p, session)
    if reason is not None:
        code = UNBOUND_VARIABLE if env.lookup(p.root) is None else ILL_FORMED_PATH
        _fail(code, reason, subject=str(p))


def _require_sub(env: TypeEnv, S: Type, T: Type, session: Session, subject: str) -> SubTrace:
    try:
        r = subtype(env, None, S, T, session=session)
    except IllFormedPathError as e:
        raise _Fail(e.diag)
    if isinstance(r, Yes):
        return r.trace
    if isinstance(r, FuelOut):
        raise FuelError("subtyping")
    _fail(SUBTYPE_FAILED, f"{S} is not a subtype of {T}",
          subject=subject, expected=str(T), actual=str(S))


def _sub_node(st: SubTrace, subject: str, ty: Type) -> TyTrace:
    return TyTrace("Sub", subject, ty, (st,))


def _path_trace(env: TypeEnv, p: Path, session: Session) -> TyTrace:
    """Derivation of p : p.type, rooted in the binding and field selections."""
    node = TyTrace("Var", p.root, env.lookup(p.root))
    cur = var(p.root)
    for a in p.selections:
        nxt = cur.sel(a)
        ev: tuple = (node,)
        for f, rule in member_facts_prov(env, cur, session):
            if isinstance(f, FieldDecl) and f.label.kind == "term" and f.label.name == a:
                ev = (node, TyTrace(rule, str(cur), f))
                break
        node = TyTrace("Fld-E", str(nxt), None, ev)
        cur = nxt
    return TyTrace("Sngl-Self", str(p), Singleton(p), (node,))


def tight_bounds(ty: Type) -> bool:
    """Whether every type member declared directly in ty has equal bounds."""
    return all(
        alpha_equal(c.lo, c.hi)
        for c in conjuncts(ty)
        if isinstance(c, TypeDecl)
    )


# ---------------------------------------------------------------- avoidance


def _rebase(env: TypeEnv, path: Path, x: str) -> Path | None:
    """Rewrite an x-rooted path onto an alias of x that does not mention x."""
    if path.root != x:
        return path
    for q in alias_class_of(env, var(x)):
        if q.root != x:
            return Path(q.root, q.selections + path.selections)
    return None


def avoid(env: TypeEnv, x: str, ty: Type, pol: int, session: Session,
          _seen: frozenset = frozenset()) -> Type:
    """Promote ty to drop every mention of x: exact via aliases and tight
    bounds where possible, otherwise widened (pol > 0) or narrowed."""
    if x not in free_vars(ty):
        return ty
    if isinstance(ty, FieldDecl):
        return FieldDecl(ty.label, avoid(env, x, ty.ty, pol, session, _seen))
    if isinstance(ty, TypeDecl):
        return TypeDecl(ty.label,
                        avoid(env, x, ty.lo, -pol, session, _seen),
                        avoid(env, x, ty.hi, pol, session, _seen))
    if isinstance(ty, And):
        return And(avoid(env, x, ty.left, pol, session, _seen),
                   avoid(env, x, ty.right, pol, session, _seen))
    if isinstance(ty, Forall):
        if ty.param == x:
            return Forall(ty.param, avoid(env, x, ty.param_type, -pol, session, _seen), ty.result)
        return Forall(ty.param,
                      avoid(env, x, ty.param_type, -pol, session, _seen),
                      avoid(env, x, ty.result, pol, session, _seen))
    if isinstance(ty, Rec):
        if ty.self_name == x:
            return ty
        return TOP if pol > 0 else BOT
    if isinstance(ty, Projection):
        key = ("proj", ty.path, ty.label)
        if key in _seen:
            return TOP if pol > 0 else BOT
        seen2 = _seen | {key}
        rb = _rebase(env, ty.path, x)
        if rb is not None and rb.root != x:
            return Projection(rb, ty.label)
        pairs = decl_bounds(env, ty.path, ty.label, session)
        for lo, hi in pairs:
            if alpha_equal(lo, hi):
                cand = avoid(env, x, lo, pol, session, seen2)
                if x not in free_vars(cand):
                    return cand
        if pairs:
            lo, hi = pairs[0]
            return avoid(env, x, hi if pol > 0 else lo, pol, session, seen2)
        return TOP if pol > 0 else BOT
    if isinstance(ty, Singleton):
        key = ("sngl", ty.path)
        if key in _seen:
            return TOP if pol > 0 else BOT
        seen2 = _seen | {key}
        rb = _rebase(env, ty.path, x)
        if rb is not None and rb.root != x:
            return Singleton(rb)
        if pol <= 0:
            return BOT
        if not ty.path.selections:
            bt = env.lookup(x)
            if bt is not None:
                return avoid(env, x, bt, pol, session, seen2)
            return TOP
        for f in field_decls(env, ty.path.prefix(), ty.path.selections[-1], session):
            cand = avoid(env, x, f, pol, session, seen2)
            if x not in free_vars(cand):
                return cand
        return TOP
    return ty


# ---------------------------------------------------------------- path checking


def _check_path(env: TypeEnv, p: Path, G: Type, session: Session) -> TyTrace:
    _wf_path(env, p, session)
    key = (p, G)
    if key in session._check_stack:
        _fail(SUBTYPE_FAILED, f"cyclic goal while checking {p} against {G}", subject=str(p))
    if len(session._check_stack) > session.check_depth:
        raise FuelError("path checking depth")
    session._check_stack.add(key)
    try:
        return _check_path_inner(env, p, G, session)
    finally:
        session._check_stack.discard(key)


def _try_subtype_path(env: TypeEnv, p: Path, G: Type, session: Session) -> TyTrace | None:
    try:
        r = subtype(env, None, Singleton(p), G, session=session)
    except IllFormedPathError:
        return None
    if isinstance(r, Yes):
        return TyTrace("Sub", str(p), G, (_path_trace(env, p, session), r.trace))
    return None


def _check_path_inner(env: TypeEnv, p: Path, G: Type, session: Session) -> TyTrace:
    if isinstance(G, Top):
        return TyTrace("Sub", str(p), G, (_path_trace(env, p, session), SubTrace("Top", Singleton(p), G)))
    if isinstance(G, And):
        lt = _check_path(env, p, G.left, session)
        rt = _check_path(env, p, G.right, session)
        return TyTrace("&-I", str(p), G, (lt, rt))
    if isinstance(G, Rec):
        quick = _try_subtype_path(env, p, G, session)
        if quick is not None:
            return quick
        inner = _check_path(env, p, substitute(G.self_name, p, G.body), session)
        return TyTrace("Rec-I", str(p), G, (inner,))
    if isinstance(G, FieldDecl) and G.label.kind == "term":
        try:
            inner = _check_path(env, p.sel(G.label.name), G.ty, session)
            return TyTrace("Fld-I", str(p), G, (inner,))
        except _Fail:
            pass
    if isinstance(G, Singleton):
        if p == G.path:
            return TyTrace("Sngl-Self", str(p), G, (_path_trace(env, p, session),))
        if alias_rep(env, p) == alias_rep(env, G.path):
            return TyTrace("Sngl-Trans", str(p), G,
                           (_path_trace(env, p, session),), note="alias")
        if (p.selections and G.path.selections
                and p.selections[-1] == G.path.selections[-1]
                and same_identity(env, p.prefix(), G.path.prefix())):
            inner = _check_path(env, p.prefix(), Singleton(G.path.prefix()), session)
            return TyTrace("Sngl-E", str(p), G, (inner,))
    if isinstance(G, Projection):
        quick = _try_subtype_path(env, p, G, session)
        if quick is not None:
            return quick
        pairs = decl_bounds(env, G.path, G.label, session)
        for lo, hi in pairs:
            try:
                inner = _check_path(env, p, lo, session)
            except _Fail:
                continue
            sel = SubTrace("<:-Sel", lo, G)
            return TyTrace("Sub", str(p), G, (inner, sel))
    quick = _try_subtype_path(env, p, G, session)
    if quick is not None:
        return quick
    _fail(SUBTYPE_FAILED, f"{p} does not check against {G}",
          subject=str(p), expected=str(G), actual=str(Singleton(p)))


# ---------------------------------------------------------------- definitions


def _check_tag(env: TypeEnv, tag: Projection, session: Session) -> TyTrace:
    reason = wf_path_reason(env, tag.path, session)
    if reason is not None:
        _fail(TAG_NOT_TYPEABLE, f"tag {tag} is not typeable: {reason}", subject=str(tag))
    if not decl_bounds(env, tag.path, tag.label, session) and not has_bot_fact(env, tag.path, session):
        _fail(TAG_NOT_TYPEABLE, f"{tag.path} has no type member {tag.label.name}", subject=str(tag))
    return TyTrace("Tag", str(tag), tag, (_path_trace(env, tag.path, session),))


def _check_defs(env: TypeEnv, self_path: Path, defs, declared: Type, session: Session) -> TyTrace | None:
    ds = defs_seq(defs)
    if not ds:
        if not alpha_equal(declared, TOP):
            _fail(DEFINITION_MISMATCH,
                  "an object without members must declare Top as its self type",
                  subject=str(self_path), expected="Top", actual=_short(declared))
        return None
    parts = conjuncts(declared)
    labels = def_labels(defs)
    if len(labels) != len(set(labels)):
        seen = set()
        for lb in labels:
            if lb in seen:
                _fail(DUPLICATE_LABEL, f"definition label {lb.name} repeated", subject=str(self_path))
            seen.add(lb)
    if len(parts) != len(ds):
        _fail(DEFINITION_MISMATCH,
              f"object declares {len(parts)} members but defines {len(ds)}",
              subject=str(self_path))
    traces = []
    for d, D in zip(ds, parts):
        traces.append(_check_def(env, self_path, d, D, session))
    if len(traces) == 1:
        return traces[0]
    return TyTrace("AndDef-I", str(self_path), declared, tuple(traces))


def _check_def(env: TypeEnv, self_path: Path, d, D: Type, session: Session) -> TyTrace:
    if isinstance(d, TypeDef):
        if not (isinstance(D, TypeDecl) and D.label == d.label
                and alpha_equal(D.lo, d.ty) and alpha_equal(D.hi, d.ty)):
            _fail(DEFINITION_MISMATCH,
                  f"type member {d.label.name} must be declared with its exact definition, got {D}",
                  subject=str(self_path))
        _wf_type(env, d.ty, session)
        return TyTrace("Def-Typ", f"{self_path}.{d.label.name}", D)
    if not isinstance(d, FieldDef):
        _fail(DEFINITION_MISMATCH, f"unrecognized definition {d}", subject=str(self_path))
    if not (isinstance(D, FieldDecl) and D.label == d.label):
        _fail(DEFINITION_MISMATCH,
              f"definition {d.label.name} does not match declared member {D}",
              subject=str(self_path))
    rhs = d.rhs
    if isinstance(rhs, Path):
        if not (isinstance(D.ty, Singleton) and D.ty.path == rhs):
            _fail(DEFINITION_MISMATCH,
                  f"field {d.label.name} holds a path and must be declared "
                  f"with exactly its singleton type, got {D.ty}",
                  subject=str(self_path))
        _wf_path(env, rhs, session)
        return TyTrace("Def-Path", f"{self_path}.{d.label.name}", D,
                       (_path_trace(env, rhs, session),))
    if isinstance(rhs, Lambda):
        if not isinstance(D.ty, Forall):
            _fail(DEFINITION_MISMATCH,
                  f"field {d.label.name} holds a function but is declared {D.ty}",
                  subject=str(self_path))
        tr = _check_lambda_against(env, rhs, D.ty, session)
        return TyTrace("Def-All", f"{self_path}.{d.label.name}", D, (tr,))
    if isinstance(rhs, ObjectVal):
        if not isinstance(D.ty, Rec):
            _fail(DEFINITION_MISMATCH,
                  f"field {d.label.name} holds an object but is declared {D.ty}",
                  subject=str(self_path))
        if not alpha_equal(Rec(rhs.self_name, rhs.self_type), D.ty):
            _fail(DEFINITION_MISMATCH,
                  f"nested object under {d.label.name} must carry its declared self type",
                  subject=str(self_path))
        if not tight_bounds(rhs.self_type):
            _fail(LOOSE_BOUNDS,
                  f"nested object {d.label.name} declares a type member with unequal bounds",
                  subject=str(self_path))
        sub_path = self_path.sel(d.label.name)
        defs2 = substitute(rhs.self_name, sub_path, rhs.defs)
        decl2 = substitute(rhs.self_name, sub_path, rhs.self_type)
        tag2 = substitute(rhs.self_name, sub_path, rhs.tag)
        tag_tr = _check_tag(env, tag2, session)
        inner = _check_defs(env, sub_path, defs2, decl2, session)
        return TyTrace("Def-New", f"{self_path}.{d.label.name}", D, (inner, tag_tr))
    _fail(FIELD_INIT_NOT_STABLE,
          f"field {d.label.name} must hold a path or a value",
          subject=str(self_path))


def _check_lambda_against(env: TypeEnv, lam: Lambda, F: Forall, session: Session) -> TyTrace:
    if not alpha_equal(lam.param_type, F.param_type):
        _fail(DEFINITION_MISMATCH,
              f"function parameter is annotated {lam.param_type} "
              f"but the declared type requires {F.param_type}",
              subject=_short(lam))
    _wf_type(env, F.param_type, session)
    param, body = lam.param, lam.body
    if param in env.names():
        z = fresh_name(param, env.names() | free_vars(body) | free_vars(F))
        body = substitute(param, var(z), body)
        param = z
    env2 = env.extend(param, F.param_type)
    goal = substitute(F.param, var(param), F.result)
    body_tr = _check_term(env2, body, goal, session)
    return TyTrace("All-I", _short(lam), F, (body_tr,), note="checked")


# ---------------------------------------------------------------- synthesis


def _synth(env: TypeEnv, t: Term, session: Session) -> tuple[Type, TyTrace]:
    if isinstance(t, Path):
        _wf_path(env, t, session)
        return Singleton(t), _path_trace(env, t, session)

    if isinstance(t, Lambda):
        _wf_type(env, t.param_type, session)
        param, body = t.param, t.body
        if param in env.names():
            z = fresh_name(param, env.names() | free_vars(body))
            body = substitute(param, var(z), body)
            param = z
        env2 = env.extend(param, t.param_type)
        U, tr = _synth(env2, body, session)
        res = Forall(param, t.param_type, U)
        return res, TyTrace("All-I", _short(t), res, (tr,))

    if isinstance(t, Apply):
        _wf_path(env, t.fun, session)
        _wf_path(env, t.arg, session)
        fun_tr = _path_trace(env, t.fun, session)
        cands = forall_facts(env, t.fun, session)
        if not cands:
            if has_bot_fact(env, t.fun, session):
                arg_tr = _path_trace(env, t.arg, session)
                return BOT, TyTrace("All-E", _short(t), BOT, (fun_tr, arg_tr), note="bottom")
            _fail(NOT_A_FUNCTION, f"{t.fun} has no function type", subject=str(t.fun))
        first_err: _Fail | None = None
        for F in cands:
            try:
                arg_tr = _check_path(env, t.arg, F.param_type, session)
            except _Fail as e:
                if first_err is None:
                    first_err = e
                continue
            res = substitute(F.param, t.arg, F.result)
            return res, TyTrace("All-E", _short(t), res, (fun_tr, arg_tr))
        inner = first_err.diag if first_err is not None else None
        _fail(ARGUMENT_MISMATCH,
              f"{t.arg} does not match the parameter type of {t.fun}"
              + (f": {inner.message}" if inner else ""),
              subject=str(t), expected=str(cands[0].param_type), actual=str(Singleton(t.arg)))

    if isinstance(t, ObjectVal):
        return _synth_object(env, t, session)

    if isinstance(t, Let):
        T1, tr1 = _synth(env, t.bound, session)
        x, body = t.var, t.body
        if x in env.names():
            z = fresh_name(x, env.names() | free_vars(body))
            body = substitute(x, var(z), body)
            x = z
        env2 = env.extend(x, T1)
        U, tr2 = _synth(env2, body, session)
        note = ""
        if x in free_vars(U):
            U = avoid(env2, x, U, 1, session)
            note = f"avoid {x}"
        if x in free_vars(U):
            _fail(ANNOTATION_REQUIRED,
                  f"body type still mentions let-bound {x}", subject=_short(t))
        return U, TyTrace("Let", _short(t), U, (tr1, tr2), note=note)

    if isinstance(t, Case):
        return _synth_case(env, t, session)

    _fail(ANNOTATION_REQUIRED, f"cannot synthesize a type for {t!r}", subject=_short(t))


def _synth_object(env: TypeEnv, t: ObjectVal, session: Session) -> tuple[Type, TyTrace]:
    x, T, tag, defs = t.self_name, t.self_type, t.tag, t.defs
    if x in env.names():
        z = fresh_name(x, env.names() | free_vars(t))
        T = substitute(x, var(z), T)
        tag = substitute(x, var(z), tag)
        defs = substitute(x, var(z), defs)
        x = z
    env2 = env.extend(x, T)
    _wf_type(env2, T, session)
    tag_tr = _check_tag(env2, tag, session)
    d_tr = _check_defs(env2, var(x), defs, T, session)
    res = Rec(x, T)
    premises = (tag_tr,) if d_tr is None else (d_tr, tag_tr)
    return res, TyTrace("{}-I", _short(t), res, premises)


def _case_env(env: TypeEnv, t: Case, session: Session):
    _wf_path(env, t.scrutinee, session)
    tag_tr = _check_tag(env, t.tag, session)
    y, then = t.binder, t.then_branch
    if y in env.names():
        z = fresh_name(y, env.names() | free_vars(then))
        then = substitute(y, var(z), then)
        y = z
    branch_ty = And(Singleton(t.scrutinee), t.tag)
    env_then = env.extend(y, branch_ty)
    return y, then, env_then, tag_tr


def _synth_case(env: TypeEnv, t: Case, session: Session) -> tuple[Type, TyTrace]:
    y, then, env_then, tag_tr = _case_env(env, t, session)
    scrut_tr = _path_trace(env, t.scrutinee, session)
    if t.returning is not None:
        _wf_type(env, t.returning, session)
        tr1 = _check_term(env_then, then, t.returning, session)
        tr2 = _check_term(env, t.else_branch, t.returning, session)
        return t.returning, TyTrace("Case", _short(t), t.returning,
                                    (scrut_tr, tag_tr, tr1, tr2))
    U1, tr1 = _synth(env_then, then, session)
    if y in free_vars(U1):
        U1 = avoid(env_then, y, U1, 1, session)
    if y in free_vars(U1):
        _fail(ANNOTATION_REQUIRED,
              f"then branch type mentions case binder {y}; add a returning annotation",
              subject=_short(t))
    U2, tr2 = _synth(env, t.else_branch, session)
    if alpha_equal(U1, U2):
        return U1, TyTrace("Case", _short(t), U1, (scrut_tr, tag_tr, tr1, tr2))
    r = subtype(env, None, U1, U2, session=session)
    if isinstance(r, Yes):
        return U2, TyTrace("Case", _short(t), U2, (scrut_tr, tag_tr, tr1, tr2, r.trace))
    r = subtype(env, None, U2, U1, session=session)
    if isinstance(r, Yes):
        return U1, TyTrace("Case", _short(t), U1, (scrut_tr, tag_tr, tr1, tr2, r.trace))
    _fail(ANNOTATION_REQUIRED,
          f"branches synthesize {U1} and {U2}; add a returning annotation",
          subject=_short(t))


# ---------------------------------------------------------------- checking


def _check_term(env: TypeEnv, t: Term, G: Type, session: Session) -> TyTrace:
    if isinstance(t, Path):
        return _check_path(env, t, G, session)

    if isinstance(t, Let):
        T1, tr1 = _synth(env, t.bound, session)
        x, body = t.var, t.body
        if x in env.names() or x in free_vars(G):
            z = fresh_name(x, env.names() | free_vars(body) | free_vars(G))
            body = substitute(x, var(z), body)
            x = z
        env2 = env.extend(x, T1)
        tr2 = _check_term(env2, body, G, session)
        return TyTrace("Let", _short(t), G, (tr1, tr2))

    if isinstance(t, Case):
        y, then, env_then, tag_tr = _case_env(env, t, session)
        scrut_tr = _path_trace(env, t.scrutinee, session)
        goal = G
        extra: tuple = ()
        if t.returning is not None and not alpha_equal(t.returning, G):
            _wf_type(env, t.returning, session)
            st = _require_sub(env, t.returning, G, session, _short(t))
            goal = t.returning
            extra = (st,)
        tr1 = _check_term(env_then, then, goal, session)
        tr2 = _check_term(env, t.else_branch, goal, session)
        return TyTrace("Case", _short(t), G, (scrut_tr, tag_tr, tr1, tr2) + extra)

    if isinstance(t, Lambda) and isinstance(G, Forall) and alpha_equal(t.param_type, G.param_type):
        tr = _check_lambda_against(env, t, G, session)
        return tr

    if isinstance(t, ObjectVal) and isinstance(G, Rec) and alpha_equal(Rec(t.self_name, t.self_type), G):
        _, tr = _synth_object(env, t, session)
        return tr

    U, tr = _synth(env, t, session)
    st = _require_sub(env, U, G, session, _short(t))
    return TyTrace("Sub", _short(t), G, (tr, st))


# ---------------------------------------------------------------- public API


def type_term(env: TypeEnv, t: Term, session: Session | None = None) -> Typed | Untyped:
    """Synthesize the most informative type for t, or a diagnostic."""
    session = session or Session()
    try:
        ty, tr = _synth(env, t, session)
        return Typed(ty, tr)
    except _Fail as e:
        return Untyped(e.diag)
    except FuelError as e:
        return Untyped(e.diag())
    except IllFormedPathError as e:
        return Untyped(e.diag)


def check_term(env: TypeEnv, t: Term, G: Type, session: Session | None = None) -> Typed | Untyped:
    """Check t against goal type G, or report why it fails."""
    session = session or Session()
    try:
        _wf_type(env, G, session)
        tr = _check_term(env, t, G, session)
        return Typed(G, tr)
    except _Fail as e:
        return Untyped(e.diag)
    except FuelError as e:
        return Untyped(e.diag())
    except IllFormedPathError as e:
        return Untyped(e.diag)


def check_path_against(env: TypeEnv, p: Path, G: Type, session: Session | None = None) -> Typed | Untyped:
    """Goal-directed membership check of a path against a type."""
    session = session or Session()
    try:
        tr = _check_path(env, p, G, session)
        return Typed(G, tr)
    except _Fail as e:
        return Untyped(e.diag)
    except FuelError as e:
        return Untyped(e.diag())
    except IllFormedPathError as e:
        return Untyped(e.diag)


def type_definitions(env: TypeEnv, self_path: Path, defs, declared: Type,
                     session: Session | None = None) -> Typed | Untyped:
    """Check an object's definitions against its declared self type."""
    session = session or Session()
    try:
        tr = _check_defs(env, self_path, defs, declared, session)
        return Typed(declared, tr)
    except _Fail as e:
        return Untyped(e.diag)
    except FuelError as e:
        return Untyped(e.diag())
    except IllFormedPathError as e:
        return Untyped(e.diag)


def typing_rules_used(result: Typed) -> set[str]:
    """Rule names appearing anywhere in a typing trace."""
    return trace_rules(result.trace)
