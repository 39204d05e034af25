"""Abstract syntax for the cdot calculus: paths, types, terms, values, definitions.

Application operands, case scrutinees and tags are paths (ANF); the only
non-path term positions are let bindings and lambda/case bodies.  Field
initializers are stable terms: paths or values.
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Label:
    """A member name with its namespace: term fields vs type members."""

    kind: str  # "term" or "type"
    name: str

    def __str__(self) -> str:
        return self.name


def term_label(name: str) -> Label:
    return Label("term", name)


def type_label(name: str) -> Label:
    return Label("type", name)


class Term:
    """Base class for terms; paths and values are stable terms."""

    def __str__(self) -> str:
        from . import surface

        return surface.format_term(self)


class Type:
    """Base class for types."""

    def __str__(self) -> str:
        from . import surface

        return surface.format_type(self)


class Definition:
    """Base class for object member definitions."""

    def __str__(self) -> str:
        from . import surface

        return surface.format_defs(self)


@dataclass(frozen=True, eq=True)
class Path(Term):
    """A variable root followed by zero or more field selections."""

    root: str
    selections: tuple[str, ...] = ()

    def sel(self, name: str) -> Path:
        return Path(self.root, self.selections + (name,))

    def components(self) -> tuple[str, ...]:
        return (self.root,) + self.selections

    def prefix(self) -> Path | None:
        """The path one selection shorter, or None for a bare variable."""
        if not self.selections:
            return None
        return Path(self.root, self.selections[:-1])

    def last(self) -> str:
        return self.selections[-1]

    def __str__(self) -> str:
        return ".".join(self.components())


def var(name: str) -> Path:
    return Path(name, ())


# ---------------------------------------------------------------- types


@dataclass(frozen=True)
class Top(Type):
    pass


@dataclass(frozen=True)
class Bot(Type):
    pass


TOP = Top()
BOT = Bot()


@dataclass(frozen=True)
class FieldDecl(Type):
    """{a : T}"""

    label: Label
    ty: Type


@dataclass(frozen=True)
class TypeDecl(Type):
    """{A : S .. T}"""

    label: Label
    lo: Type
    hi: Type


@dataclass(frozen=True)
class And(Type):
    left: Type
    right: Type


@dataclass(frozen=True)
class Rec(Type):
    """mu (x : T); the self name binds in the body."""

    self_name: str
    body: Type


@dataclass(frozen=True)
class Forall(Type):
    """all (x : S) T; dependent function type."""

    param: str
    param_type: Type
    result: Type


@dataclass(frozen=True)
class Projection(Type):
    """p.A, the type member A of path p."""

    path: Path
    label: Label


@dataclass(frozen=True)
class Singleton(Type):
    """p.type, inhabited by paths that alias p."""

    path: Path


def and_types(parts: list[Type] | tuple[Type, ...]) -> Type:
    """Left-associated intersection of a nonempty sequence."""
    parts = list(parts)
    ty = parts[0]
    for p in parts[1:]:
        ty = And(ty, p)
    return ty


def conjuncts(ty: Type) -> list[Type]:
    """Flatten an intersection into its leaf conjuncts, left to right."""
    if isinstance(ty, And):
        return conjuncts(ty.left) + conjuncts(ty.right)
    return [ty]


# ---------------------------------------------------------------- values


class Value(Term):
    pass


@dataclass(frozen=True)
class Lambda(Value):
    param: str
    param_type: Type
    body: Term


@dataclass(frozen=True)
class ObjectVal(Value):
    """nu (x : T) [p.A] {d}; the self name binds in T, the tag and the defs."""

    self_name: str
    self_type: Type
    tag: Projection
    defs: Definition


# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class Apply(Term):
    fun: Path
    arg: Path


@dataclass(frozen=True)
class Let(Term):
    var: str
    bound: Term
    body: Term


@dataclass(frozen=True)
class Case(Term):
    """case p of y : q.A => t1 else t2, optionally with a returning ascription."""

    scrutinee: Path
    binder: str
    tag: Projection
    then_branch: Term
    else_branch: Term
    returning: Type | None = None


def is_stable(t: Term) -> bool:
    return isinstance(t, (Path, Value))


# ---------------------------------------------------------------- definitions


@dataclass(frozen=True)
class FieldDef(Definition):
    """{a = s}; the initializer must be a stable term."""

    label: Label
    rhs: Term


@dataclass(frozen=True)
class TypeDef(Definition):
    """{A = T}"""

    label: Label
    ty: Type


@dataclass(frozen=True)
class AndDef(Definition):
    left: Definition
    right: Definition


@dataclass(frozen=True)
class NoDefs(Definition):
    """The empty definition list of an object with no members."""


def and_defs(parts: list[Definition]) -> Definition:
    if not parts:
        return NoDefs()
    d = parts[0]
    for p in parts[1:]:
        d = AndDef(d, p)
    return d


def defs_seq(d: Definition) -> list[Definition]:
    """Flatten a definition conjunction into its leaf definitions."""
    if isinstance(d, AndDef):
        return defs_seq(d.left) + defs_seq(d.right)
    if isinstance(d, NoDefs):
        return []
    return [d]


def def_labels(d: Definition) -> list[Label]:
    out = []
    for leaf in defs_seq(d):
        if isinstance(leaf, (FieldDef, TypeDef)):
            out.append(leaf.label)
    return out


# ---------------------------------------------------------------- free names


def free_vars(node) -> set[str]:
    """Free variable roots of a path, type, term or definition."""
    if isinstance(node, Path):
        return {node.root}
    if isinstance(node, (Top, Bot)):
        return set()
    if isinstance(node, FieldDecl):
        return free_vars(node.ty)
    if isinstance(node, TypeDecl):
        return free_vars(node.lo) | free_vars(node.hi)
    if isinstance(node, And):
        return free_vars(node.left) | free_vars(node.right)
    if isinstance(node, Rec):
        return free_vars(node.body) - {node.self_name}
    if isinstance(node, Forall):
        return free_vars(node.param_type) | (free_vars(node.result) - {node.param})
    if isinstance(node, Projection):
        return {node.path.root}
    if isinstance(node, Singleton):
        return {node.path.root}
    if isinstance(node, Lambda):
        return free_vars(node.param_type) | (free_vars(node.body) - {node.param})
    if isinstance(node, ObjectVal):
        inner = free_vars(node.self_type) | free_vars(node.tag) | free_vars(node.defs)
        return inner - {node.self_name}
    if isinstance(node, Apply):
        return {node.fun.root, node.arg.root}
    if isinstance(node, Let):
        return free_vars(node.bound) | (free_vars(node.body) - {node.var})
    if isinstance(node, Case):
        out = {node.scrutinee.root, node.tag.path.root}
        out |= free_vars(node.then_branch) - {node.binder}
        out |= free_vars(node.else_branch)
        if node.returning is not None:
            out |= free_vars(node.returning)
        return out
    if isinstance(node, FieldDef):
        return free_vars(node.rhs)
    if isinstance(node, TypeDef):
        return free_vars(node.ty)
    if isinstance(node, AndDef):
        return free_vars(node.left) | free_vars(node.right)
    if isinstance(node, NoDefs):
        return set()
    raise TypeError(f"free_vars: unknown node {node!r}")


def bound_names(node) -> set[str]:
    """Every binder name occurring anywhere in the node."""
    if isinstance(node, (Path, Top, Bot)):
        return set()
    if isinstance(node, FieldDecl):
        return bound_names(node.ty)
    if isinstance(node, TypeDecl):
        return bound_names(node.lo) | bound_names(node.hi)
    if isinstance(node, And):
        return bound_names(node.left) | bound_names(node.right)
    if isinstance(node, Rec):
        return {node.self_name} | bound_names(node.body)
    if isinstance(node, Forall):
        return {node.param} | bound_names(node.param_type) | bound_names(node.result)
    if isinstance(node, (Projection, Singleton)):
        return set()
    if isinstance(node, Lambda):
        return {node.param} | bound_names(node.param_type) | bound_names(node.body)
    if isinstance(node, ObjectVal):
        return {node.self_name} | bound_names(node.self_type) | bound_names(node.defs)
    if isinstance(node, Apply):
        return set()
    if isinstance(node, Let):
        return {node.var} | bound_names(node.bound) | bound_names(node.body)
    if isinstance(node, Case):
        out = {node.binder} | bound_names(node.then_branch) | bound_names(node.else_branch)
        if node.returning is not None:
            out |= bound_names(node.returning)
        return out
    if isinstance(node, FieldDef):
        return bound_names(node.rhs)
    if isinstance(node, TypeDef):
        return bound_names(node.ty)
    if isinstance(node, AndDef):
        return bound_names(node.left) | bound_names(node.right)
    if isinstance(node, NoDefs):
        return set()
    raise TypeError(f"bound_names: unknown node {node!r}")


def fresh_name(base: str, avoid: set[str]) -> str:
    """Deterministic fresh name: base itself, else base with the least suffix."""
    if base not in avoid:
        return base
    k = 1
    while f"{base}{k}" in avoid:
        k += 1
    return f"{base}{k}"


class FreshNames:
    """Name supply with a monotone counter, shared by one elaboration run."""

    def __init__(self, avoid: set[str] | None = None):
        self.used: set[str] = set(avoid) if avoid else set()
        self.counter = 0

    def reserve(self, name: str) -> None:
        self.used.add(name)

    def fresh(self, base: str) -> str:
        if base and base not in self.used:
            self.used.add(base)
            return base
        while True:
            self.counter += 1
            cand = f"{base}{self.counter}"
            if cand not in self.used:
                self.used.add(cand)
                return cand


# ---------------------------------------------------------------- substitution


def substitute(x: str, p: Path, node):
    """Capture-avoiding substitution of the path p for the variable x."""
    avoid = free_vars(node) | {p.root} | set(p.selections)
    return _subst(x, p, node, avoid)


def _subst_path(x: str, p: Path, path: Path) -> Path:
    if path.root == x:
        return Path(p.root, p.selections + path.selections)
    return path


def _subst_binder(x: str, p: Path, binder: str, parts: list, avoid: set[str]):
    """Substitute under one binder, renaming it when it would capture p's root.

    parts is a list of subnodes in which the binder scopes; returns the
    possibly renamed binder and the rewritten parts.
    """
    if binder == x:
        return binder, parts
    if binder == p.root:
        new = fresh_name(binder, avoid | {x})
        rp = var(new)
        parts = [_subst(binder, rp, q, avoid | {new}) for q in parts]
        binder = new
    return binder, [_subst(x, p, q, avoid | {binder}) for q in parts]


def _subst(x: str, p: Path, node, avoid: set[str]):
    if isinstance(node, Path):
        return _subst_path(x, p, node)
    if isinstance(node, (Top, Bot)):
        return node
    if isinstance(node, FieldDecl):
        return FieldDecl(node.label, _subst(x, p, node.ty, avoid))
    if isinstance(node, TypeDecl):
        return TypeDecl(node.label, _subst(x, p, node.lo, avoid), _subst(x, p, node.hi, avoid))
    if isinstance(node, And):
        return And(_subst(x, p, node.left, avoid), _subst(x, p, node.right, avoid))
    if isinstance(node, Rec):
        b, [body] = _subst_binder(x, p, node.self_name, [node.body], avoid)
        return Rec(b, body)
    if isinstance(node, Forall):
        pt = _subst(x, p, node.param_type, avoid)
        b, [res] = _subst_binder(x, p, node.param, [node.result], avoid)
        return Forall(b, pt, res)
    if isinstance(node, Projection):
        return Projection(_subst_path(x, p, node.path), node.label)
    if isinstance(node, Singleton):
        return Singleton(_subst_path(x, p, node.path))
    if isinstance(node, Lambda):
        pt = _subst(x, p, node.param_type, avoid)
        b, [body] = _subst_binder(x, p, node.param, [node.body], avoid)
        return Lambda(b, pt, body)
    if isinstance(node, ObjectVal):
        b, [st, tag, defs] = _subst_binder(
            x, p, node.self_name, [node.self_type, node.tag, node.defs], avoid
        )
        return ObjectVal(b, st, tag, defs)
    if isinstance(node, Apply):
        return Apply(_subst_path(x, p, node.fun), _subst_path(x, p, node.arg))
    if isinstance(node, Let):
        bound = _subst(x, p, node.bound, avoid)
        b, [body] = _subst_binder(x, p, node.var, [node.body], avoid)
        return Let(b, bound, body)
    if isinstance(node, Case):
        scrut = _subst_path(x, p, node.scrutinee)
        tag = Projection(_subst_path(x, p, node.tag.path), node.tag.label)
        els = _subst(x, p, node.else_branch, avoid)
        ret = None if node.returning is None else _subst(x, p, node.returning, avoid)
        b, [then] = _subst_binder(x, p, node.binder, [node.then_branch], avoid)
        return Case(scrut, b, tag, then, els, ret)
    if isinstance(node, FieldDef):
        return FieldDef(node.label, _subst(x, p, node.rhs, avoid))
    if isinstance(node, TypeDef):
        return TypeDef(node.label, _subst(x, p, node.ty, avoid))
    if isinstance(node, AndDef):
        return AndDef(_subst(x, p, node.left, avoid), _subst(x, p, node.right, avoid))
    if isinstance(node, NoDefs):
        return node
    raise TypeError(f"substitute: unknown node {node!r}")


# ---------------------------------------------------------------- prefix replacement


def replace_path_prefix(old: Path, new: Path, node):
    """Rewrite every path with prefix old to start with new instead.

    Every occurrence is rewritten in one pass; shadowing binders stop the
    rewrite in their scope, and binders matching new's root are renamed.
    """
    avoid = free_vars(node) | {old.root, new.root}
    return _repl(old.components(), new, node, avoid)


def _repl_path(oc: tuple[str, ...], new: Path, path: Path) -> Path:
    pc = path.components()
    if len(pc) >= len(oc) and pc[: len(oc)] == oc:
        rest = pc[len(oc):]
        return Path(new.root, new.selections + rest)
    return path


def _repl_binder(oc, new: Path, binder: str, parts: list, avoid: set[str]):
    if binder == oc[0]:
        return binder, parts  # shadows the replaced root
    if binder == new.root:
        nb = fresh_name(binder, avoid | {oc[0]})
        rp = var(nb)
        parts = [_subst(binder, rp, q, avoid | {nb}) for q in parts]
        binder = nb
    return binder, [_repl(oc, new, q, avoid | {binder}) for q in parts]


def _repl(oc, new: Path, node, avoid: set[str]):
    if isinstance(node, Path):
        return _repl_path(oc, new, node)
    if isinstance(node, (Top, Bot)):
        return node
    if isinstance(node, FieldDecl):
        return FieldDecl(node.label, _repl(oc, new, node.ty, avoid))
    if isinstance(node, TypeDecl):
        return TypeDecl(node.label, _repl(oc, new, node.lo, avoid), _repl(oc, new, node.hi, avoid))
    if isinstance(node, And):
        return And(_repl(oc, new, node.left, avoid), _repl(oc, new, node.right, avoid))
    if isinstance(node, Rec):
        b, [body] = _repl_binder(oc, new, node.self_name, [node.body], avoid)
        return Rec(b, body)
    if isinstance(node, Forall):
        pt = _repl(oc, new, node.param_type, avoid)
        b, [res] = _repl_binder(oc, new, node.param, [node.result], avoid)
        return Forall(b, pt, res)
    if isinstance(node, Projection):
        return Projection(_repl_path(oc, new, node.path), node.label)
    if isinstance(node, Singleton):
        return Singleton(_repl_path(oc, new, node.path))
    if isinstance(node, Lambda):
        pt = _repl(oc, new, node.param_type, avoid)
        b, [body] = _repl_binder(oc, new, node.param, [node.body], avoid)
        return Lambda(b, pt, body)
    if isinstance(node, ObjectVal):
        b, [st, tag, defs] = _repl_binder(
            oc, new, node.self_name, [node.self_type, node.tag, node.defs], avoid
        )
        return ObjectVal(b, st, tag, defs)
    if isinstance(node, Apply):
        return Apply(_repl_path(oc, new, node.fun), _repl_path(oc, new, node.arg))
    if isinstance(node, Let):
        bound = _repl(oc, new, node.bound, avoid)
        b, [body] = _repl_binder(oc, new, node.var, [node.body], avoid)
        return Let(b, bound, body)
    if isinstance(node, Case):
        scrut = _repl_path(oc, new, node.scrutinee)
        tag = Projection(_repl_path(oc, new, node.tag.path), node.tag.label)
        els = _repl(oc, new, node.else_branch, avoid)
        ret = None if node.returning is None else _repl(oc, new, node.returning, avoid)
        b, [then] = _repl_binder(oc, new, node.binder, [node.then_branch], avoid)
        return Case(scrut, b, tag, then, els, ret)
    if isinstance(node, FieldDef):
        return FieldDef(node.label, _repl(oc, new, node.rhs, avoid))
    if isinstance(node, TypeDef):
        return TypeDef(node.label, _repl(oc, new, node.ty, avoid))
    if isinstance(node, AndDef):
        return AndDef(_repl(oc, new, node.left, avoid), _repl(oc, new, node.right, avoid))
    if isinstance(node, NoDefs):
        return node
    raise TypeError(f"replace_path_prefix: unknown node {node!r}")


# ---------------------------------------------------------------- alpha equality


def alpha_equal(a, b) -> bool:
    """Structural equality up to consistent renaming of bound names."""
    return _alpha(a, b, {}, {})


def _alpha_root(r1: str, r2: str, m1: dict, m2: dict) -> bool:
    b1, b2 = r1 in m1, r2 in m2
    if b1 != b2:
        return False
    if b1:
        return m1[r1] == r2 and m2[r2] == r1
    return r1 == r2


def _alpha_path(p1: Path, p2: Path, m1, m2) -> bool:
    return _alpha_root(p1.root, p2.root, m1, m2) and p1.selections == p2.selections


def _alpha_bind(x1: str, x2: str, m1, m2):
    m1 = dict(m1)
    m2 = dict(m2)
    m1[x1] = x2
    m2[x2] = x1
    return m1, m2


def _alpha(a, b, m1, m2) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Path):
        return _alpha_path(a, b, m1, m2)
    if isinstance(a, (Top, Bot)):
        return True
    if isinstance(a, FieldDecl):
        return a.label == b.label and _alpha(a.ty, b.ty, m1, m2)
    if isinstance(a, TypeDecl):
        return a.label == b.label and _alpha(a.lo, b.lo, m1, m2) and _alpha(a.hi, b.hi, m1, m2)
    if isinstance(a, And):
        return _alpha(a.left, b.left, m1, m2) and _alpha(a.right, b.right, m1, m2)
    if isinstance(a, Rec):
        n1, n2 = _alpha_bind(a.self_name, b.self_name, m1, m2)
        return _alpha(a.body, b.body, n1, n2)
    if isinstance(a, Forall):
        if not _alpha(a.param_type, b.param_type, m1, m2):
            return False
        n1, n2 = _alpha_bind(a.param, b.param, m1, m2)
        return _alpha(a.result, b.result, n1, n2)
    if isinstance(a, Projection):
        return a.label == b.label and _alpha_path(a.path, b.path, m1, m2)
    if isinstance(a, Singleton):
        return _alpha_path(a.path, b.path, m1, m2)
    if isinstance(a, Lambda):
        if not _alpha(a.param_type, b.param_type, m1, m2):
            return False
        n1, n2 = _alpha_bind(a.param, b.param, m1, m2)
        return _alpha(a.body, b.body, n1, n2)
    if isinstance(a, ObjectVal):
        n1, n2 = _alpha_bind(a.self_name, b.self_name, m1, m2)
        return (
            _alpha(a.self_type, b.self_type, n1, n2)
            and _alpha(a.tag, b.tag, n1, n2)
            and _alpha(a.defs, b.defs, n1, n2)
        )
    if isinstance(a, Apply):
        return _alpha_path(a.fun, b.fun, m1, m2) and _alpha_path(a.arg, b.arg, m1, m2)
    if isinstance(a, Let):
        if not _alpha(a.bound, b.bound, m1, m2):
            return False
        n1, n2 = _alpha_bind(a.var, b.var, m1, m2)
        return _alpha(a.body, b.body, n1, n2)
    if isinstance(a, Case):
        if not (_alpha_path(a.scrutinee, b.scrutinee, m1, m2) and _alpha(a.tag, b.tag, m1, m2)):
            return False
        if (a.returning is None) != (b.returning is None):
            return False
        if a.returning is not None and not _alpha(a.returning, b.returning, m1, m2):
            return False
        if not _alpha(a.else_branch, b.else_branch, m1, m2):
            return False
        n1, n2 = _alpha_bind(a.binder, b.binder, m1, m2)
        return _alpha(a.then_branch, b.then_branch, n1, n2)
    if isinstance(a, FieldDef):
        return a.label == b.label and _alpha(a.rhs, b.rhs, m1, m2)
    if isinstance(a, TypeDef):
        return a.label == b.label and _alpha(a.ty, b.ty, m1, m2)
    if isinstance(a, AndDef):
        return _alpha(a.left, b.left, m1, m2) and _alpha(a.right, b.right, m1, m2)
    if isinstance(a, NoDefs):
        return True
    raise TypeError(f"alpha_equal: unknown node {a!r}")
