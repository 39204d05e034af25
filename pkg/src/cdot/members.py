"""Type environments, path member sets, and alias identity for paths.

The member set of a path collects every type the checker may assign to it,
by unfolding recursive self types at the path, splitting intersections,
merging singleton alias chains in both directions, and widening projections
through their upper bounds.  All unfolding is fuel bounded and cycle
tolerant: a re-entered path contributes what it has so far.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import FUEL_EXHAUSTED, Diagnostic
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
    conjuncts,
    substitute,
    var,
)

DEFAULT_MEMBER_FUEL = 64
DEFAULT_SUBTYPE_FUEL = 1000
DEFAULT_RECON_OPS = 4096
DEFAULT_ALIAS_DEPTH = 16


class TypeEnv:
    """Ordered distinct bindings; later types may mention earlier variables."""

    def __init__(self, bindings: tuple[tuple[str, Type], ...] = ()):
        self.bindings = bindings
        self._index = {name: ty for name, ty in bindings}
        # per-env lazy caches, confined to one checking session
        self._facts: dict[Path, list[Type]] = {}
        self._fact_prov: dict[Path, list[str]] = {}
        self._facts_in_progress: dict[Path, tuple[list[Type], list[str]]] = {}
        self._alias_uf: dict[Path, Path] | None = None
        self._bounds = None
        self._sub_yes: dict = {}

    def lookup(self, name: str) -> Type | None:
        return self._index.get(name)

    def extend(self, name: str, ty: Type) -> TypeEnv:
        if name in self._index:
            raise ValueError(f"duplicate binding {name}")
        return TypeEnv(self.bindings + ((name, ty),))

    def names(self) -> set[str]:
        return set(self._index)

    def __repr__(self) -> str:
        inner = ", ".join(f"{n}: {t}" for n, t in self.bindings)
        return f"TypeEnv({inner})"


EMPTY_ENV = TypeEnv()


class FuelError(Exception):
    """Raised when a fuel budget runs out; reported as a distinct diagnostic."""

    def __init__(self, what: str):
        self.what = what
        super().__init__(what)

    def diag(self) -> Diagnostic:
        return Diagnostic(FUEL_EXHAUSTED, f"fuel exhausted during {self.what}")


@dataclass
class Session:
    """Tunable fuels plus scratch state for one checking run."""

    member_fuel: int = DEFAULT_MEMBER_FUEL
    subtype_fuel: int = DEFAULT_SUBTYPE_FUEL
    recon_ops: int = DEFAULT_RECON_OPS
    trace: bool = True
    check_depth: int = 256
    _check_stack: set = field(default_factory=set)


# ---------------------------------------------------------------- alias identity


def _mine_aliases(env: TypeEnv, root: Path, ty: Type, edges: list[tuple[Path, Path]], depth: int):
    """Collect (path, aliased path) pairs declared by one binding's type."""
    if depth <= 0:
        return
    if isinstance(ty, Singleton):
        edges.append((root, ty.path))
        return
    if isinstance(ty, And):
        _mine_aliases(env, root, ty.left, edges, depth - 1)
        _mine_aliases(env, root, ty.right, edges, depth - 1)
        return
    if isinstance(ty, Rec):
        _mine_aliases(env, root, substitute(ty.self_name, root, ty.body), edges, depth - 1)
        return
    if isinstance(ty, FieldDecl):
        _mine_aliases(env, root.sel(ty.label.name), ty.ty, edges, depth - 1)
        return
    # projections, decls, functions: no alias information mined here


def _alias_find(uf: dict[Path, Path], p: Path) -> Path:
    while uf.get(p, p) != p:
        uf[p] = uf.get(uf[p], uf[p])
        p = uf[p]
    return p


def _alias_union(uf: dict[Path, Path], a: Path, b: Path):
    ra, rb = _alias_find(uf, a), _alias_find(uf, b)
    if ra != rb:
        # keep the shorter, lexicographically smaller path as representative
        ka = (len(ra.components()), ra.components())
        kb = (len(rb.components()), rb.components())
        if kb < ka:
            ra, rb = rb, ra
        uf[rb] = ra


def _canon_in(uf: dict[Path, Path], p: Path, depth: int = 32) -> Path:
    rep = _alias_find(uf, p)
    if rep != p or depth <= 0:
        return rep
    if p.selections:
        pref = _canon_in(uf, p.prefix(), depth - 1)
        if pref != p.prefix():
            return _alias_find(uf, pref.sel(p.selections[-1]))
    return p


def alias_classes(env: TypeEnv) -> dict[Path, Path]:
    """Union-find over paths declared equal by singleton types in env,
    closed under selection congruence: aliased prefixes select aliased
    fields."""
    if env._alias_uf is not None:
        return env._alias_uf
    uf: dict[Path, Path] = {}
    edges: list[tuple[Path, Path]] = []
    for name, ty in env.bindings:
        _mine_aliases(env, var(name), ty, edges, DEFAULT_ALIAS_DEPTH)
    for a, b in edges:
        _alias_union(uf, a, b)
    changed = True
    rounds = 0
    while changed and rounds < 64:
        changed = False
        rounds += 1
        for q in list(uf):
            if not q.selections:
                continue
            pref = _canon_in(uf, q.prefix())
            if pref == q.prefix():
                continue
            cand = pref.sel(q.selections[-1])
            if _alias_find(uf, cand) != _alias_find(uf, q):
                _alias_union(uf, cand, q)
                changed = True
    env._alias_uf = uf
    return uf


def alias_rep(env: TypeEnv, p: Path) -> Path:
    return _alias_find(alias_classes(env), p)


def alias_class_of(env: TypeEnv, p: Path) -> list[Path]:
    uf = alias_classes(env)
    rep = _alias_find(uf, p)
    out = [q for q in uf if _alias_find(uf, q) == rep]
    if p not in out:
        out.append(p)
    return sorted(set(out), key=lambda q: (len(q.components()), q.components()))


def same_identity(env: TypeEnv, p: Path, q: Path) -> bool:
    """Whether p and q denote the same object: alias classes plus selection
    congruence (aliased prefixes select aliased fields)."""
    if p == q:
        return True
    if alias_rep(env, p) == alias_rep(env, q):
        return True
    if p.selections and q.selections and p.selections[-1] == q.selections[-1]:
        return same_identity(env, p.prefix(), q.prefix())
    return False


def canonical_path(env: TypeEnv, p: Path) -> Path:
    """Alias-class representative, applied through selection prefixes."""
    rep = alias_rep(env, p)
    if rep != p:
        return rep
    if p.selections:
        pref = canonical_path(env, p.prefix())
        if pref != p.prefix():
            return _alias_find(alias_classes(env), pref.sel(p.selections[-1]))
    return p


def canonicalize_type(env: TypeEnv, ty: Type) -> Type:
    """Rewrite every path in ty to its alias representative."""
    if isinstance(ty, (Top, Bot)):
        return ty
    if isinstance(ty, FieldDecl):
        return FieldDecl(ty.label, canonicalize_type(env, ty.ty))
    if isinstance(ty, TypeDecl):
        return TypeDecl(ty.label, canonicalize_type(env, ty.lo), canonicalize_type(env, ty.hi))
    if isinstance(ty, And):
        return And(canonicalize_type(env, ty.left), canonicalize_type(env, ty.right))
    if isinstance(ty, Rec):
        return Rec(ty.self_name, canonicalize_type(env, ty.body))
    if isinstance(ty, Forall):
        return Forall(ty.param, canonicalize_type(env, ty.param_type), canonicalize_type(env, ty.result))
    if isinstance(ty, Projection):
        return Projection(canonical_path(env, ty.path), ty.label)
    if isinstance(ty, Singleton):
        return Singleton(canonical_path(env, ty.path))
    raise TypeError(f"canonicalize_type: {ty!r}")


# ---------------------------------------------------------------- member facts


def member_facts(env: TypeEnv, p: Path, session: Session) -> list[Type]:
    """Every type the checker may assign to p, as a deduplicated list.

    Roots the closure at the binding type (or at field declarations of the
    prefix), then closes under intersection splitting, recursive-type
    unfolding at p, singleton alias merging in both directions, and upper
    bound widening of projections.
    """
    if p in env._facts:
        return env._facts[p]
    if p in env._facts_in_progress:
        return list(env._facts_in_progress[p][0])
    acc: list[Type] = []
    prov: list[str] = []
    env._facts_in_progress[p] = (acc, prov)
    try:
        fuel = [session.member_fuel]
        _close_path(env, p, acc, prov, fuel, session)
        env._facts[p] = acc
        env._fact_prov[p] = prov
    finally:
        env._facts_in_progress.pop(p, None)
    return acc


def member_facts_prov(env: TypeEnv, p: Path, session: Session) -> list[tuple[Type, str]]:
    """Member facts paired with the rule that introduced each one."""
    facts = member_facts(env, p, session)
    prov = env._fact_prov.get(p)
    if prov is None or len(prov) != len(facts):
        prov = ["Var"] * len(facts)
    return list(zip(facts, prov))


def _record(acc: list[Type], prov: list[str], ty: Type, rule: str) -> bool:
    if ty in acc:
        return False
    acc.append(ty)
    prov.append(rule)
    return True


def _close_path(env: TypeEnv, p: Path, acc: list[Type], prov: list[str], fuel: list[int], session: Session):
    seeds: list[tuple[Type, str]] = []
    if not p.selections:
        t = env.lookup(p.root)
        if t is not None:
            seeds.append((t, "Var"))
    else:
        pref = p.prefix()
        a = p.selections[-1]
        for f in member_facts(env, pref, session):
            if isinstance(f, FieldDecl) and f.label.kind == "term" and f.label.name == a:
                seeds.append((f.ty, "Fld-E"))
    for q in alias_class_of(env, p):
        if q != p:
            seeds.append((Singleton(q), "Sngl-Trans"))
    for s, rule in seeds:
        _expand(env, p, s, acc, prov, rule, fuel, session)


def _expand(env: TypeEnv, p: Path, ty: Type, acc: list[Type], prov: list[str], rule: str,
            fuel: list[int], session: Session):
    if fuel[0] <= 0:
        raise FuelError(f"member set of {p}")
    if isinstance(ty, And):
        _expand(env, p, ty.left, acc, prov, rule, fuel, session)
        _expand(env, p, ty.right, acc, prov, rule, fuel, session)
        return
    if not _record(acc, prov, ty, rule):
        return
    fuel[0] -= 1
    if isinstance(ty, Rec):
        _expand(env, p, substitute(ty.self_name, p, ty.body), acc, prov, "Rec-E", fuel, session)
        return
    if isinstance(ty, Singleton):
        if ty.path != p:
            for f in member_facts(env, ty.path, session):
                _expand(env, p, f, acc, prov, "Sngl-Trans", fuel, session)
        return
    if isinstance(ty, Projection):
        for lo, hi in decl_bounds(env, ty.path, ty.label, session):
            _expand(env, p, hi, acc, prov, "Sub", fuel, session)
        return
    # Top, Bot, decls, Forall carry no further member structure for p


def decl_bounds(env: TypeEnv, p: Path, label: Label, session: Session) -> list[tuple[Type, Type]]:
    """All (lower, upper) bound pairs declared for p's type member `label`."""
    out = []
    for f in member_facts(env, p, session):
        if isinstance(f, TypeDecl) and f.label == label:
            out.append((f.lo, f.hi))
    return out


def field_decls(env: TypeEnv, p: Path, name: str, session: Session) -> list[Type]:
    """All declared types for p's term field `name`."""
    out = []
    for f in member_facts(env, p, session):
        if isinstance(f, FieldDecl) and f.label.kind == "term" and f.label.name == name:
            out.append(f.ty)
    return out


def forall_facts(env: TypeEnv, p: Path, session: Session) -> list[Forall]:
    return [f for f in member_facts(env, p, session) if isinstance(f, Forall)]


def has_bot_fact(env: TypeEnv, p: Path, session: Session) -> bool:
    return any(isinstance(f, Bot) for f in member_facts(env, p, session))


# ---------------------------------------------------------------- path well-formedness


def wf_path_reason(env: TypeEnv, p: Path, session: Session) -> str | None:
    """None when p is typeable; otherwise a short reason."""
    if env.lookup(p.root) is None:
        return f"unbound variable {p.root}"
    cur = var(p.root)
    for a in p.selections:
        if not field_decls(env, cur, a, session):
            if has_bot_fact(env, cur, session):
                cur = cur.sel(a)
                continue
            return f"{cur} has no field member {a}"
        cur = cur.sel(a)
    return None


def wf_path(env: TypeEnv, p: Path, session: Session | None = None) -> bool:
    return wf_path_reason(env, p, session or Session()) is None
