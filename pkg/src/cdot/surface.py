"""Concrete syntax: lexer, parsers, and printers for both languages.

Object-calculus terms use keyword forms (lambda, nu, let, case) with paths
written as dotted chains; names starting with an upper-case letter are type
members, lower-case names are term members and variables.  The GADT
language uses data declarations followed by one program term.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import gadt as G
from .syntax import (
    TOP,
    BOT,
    And,
    AndDef,
    Apply,
    Bot,
    Case,
    Definition,
    FieldDecl,
    FieldDef,
    Forall,
    Label,
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
    and_defs,
    conjuncts,
    defs_seq,
    term_label,
    type_label,
    var,
)

# ---------------------------------------------------------------- lexer


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}" if line else message)


@dataclass(frozen=True)
class Tok:
    kind: str  # IDENT, NUM, SYM, EOF
    text: str
    line: int
    col: int


_SYMS2 = ("..", "->", "=>", "/\\")
_SYMS1 = "(){}[]<>.,;:=|&*"


def tokenize(src: str) -> list[Tok]:
    toks: list[Tok] = []
    i, line, col = 0, 1, 1
    n = len(src)
    while i < n:
        c = src[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if src.startswith("//", i):
            while i < n and src[i] != "\n":
                i += 1
            continue
        two = src[i : i + 2]
        if two in _SYMS2:
            toks.append(Tok("SYM", "&" if two == "/\\" else two, line, col))
            i += 2
            col += 2
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            toks.append(Tok("IDENT", src[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and src[j].isdigit():
                j += 1
            toks.append(Tok("NUM", src[i:j], line, col))
            col += j - i
            i = j
            continue
        if c in _SYMS1:
            toks.append(Tok("SYM", c, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(Tok("EOF", "", line, col))
    return toks


class _P:
    def __init__(self, toks: list[Tok]):
        self.toks = toks
        self.i = 0

    def peek(self, k: int = 0) -> Tok:
        j = min(self.i + k, len(self.toks) - 1)
        return self.toks[j]

    def next(self) -> Tok:
        t = self.toks[self.i]
        if t.kind != "EOF":
            self.i += 1
        return t

    def at(self, kind: str, text: str | None = None, k: int = 0) -> bool:
        t = self.peek(k)
        return t.kind == kind and (text is None or t.text == text)

    def at_word(self, w: str, k: int = 0) -> bool:
        return self.at("IDENT", w, k)

    def accept(self, kind: str, text: str | None = None) -> Tok | None:
        if self.at(kind, text):
            return self.next()
        return None

    def expect(self, kind: str, text: str | None = None) -> Tok:
        t = self.peek()
        if not self.at(kind, text):
            want = text if text is not None else kind
            raise ParseError(f"expected {want!r}, found {t.text!r}", t.line, t.col)
        return self.next()

    def err(self, msg: str):
        t = self.peek()
        raise ParseError(msg + f" (found {t.text!r})", t.line, t.col)


def _is_lower(name: str) -> bool:
    return name[:1].islower() or name[:1] == "_"


def _is_upper(name: str) -> bool:
    return name[:1].isupper()


# ---------------------------------------------------------------- object-calculus parser

_KEYWORDS = {
    "lambda", "nu", "let", "in", "case", "of", "returning", "else",
    "mu", "all", "type", "Top", "Bot",
}


def _lident(p: _P, what: str = "name") -> str:
    t = p.peek()
    if t.kind != "IDENT" or not _is_lower(t.text) or t.text in _KEYWORDS:
        p.err(f"expected lower-case {what}")
    return p.next().text


def _uident(p: _P, what: str = "type label") -> str:
    t = p.peek()
    if t.kind != "IDENT" or not _is_upper(t.text) or t.text in _KEYWORDS:
        p.err(f"expected upper-case {what}")
    return p.next().text


def _path(p: _P) -> Path:
    root = _lident(p, "variable")
    sels: list[str] = []
    while p.at("SYM", ".") and p.peek(1).kind == "IDENT" \
            and _is_lower(p.peek(1).text) and p.peek(1).text not in _KEYWORDS:
        p.next()
        sels.append(p.next().text)
    return Path(root, tuple(sels))


def _projection(p: _P) -> Projection:
    base = _path(p)
    p.expect("SYM", ".")
    name = _uident(p)
    return Projection(base, type_label(name))


def _type_atom(p: _P) -> Type:
    if p.accept("IDENT", "Top"):
        return TOP
    if p.accept("IDENT", "Bot"):
        return BOT
    if p.accept("IDENT", "mu"):
        p.expect("SYM", "(")
        x = _lident(p, "self name")
        p.expect("SYM", ":")
        body = _type(p)
        p.expect("SYM", ")")
        return Rec(x, body)
    if p.at("SYM", "{"):
        return _braced_members(p)
    if p.at("SYM", "("):
        p.next()
        t = _type(p)
        p.expect("SYM", ")")
        return t
    if p.peek().kind == "IDENT" and _is_lower(p.peek().text) and p.peek().text not in _KEYWORDS:
        base = _path(p)
        p.expect("SYM", ".")
        if p.accept("IDENT", "type"):
            return Singleton(base)
        name = _uident(p, "type label or `type`")
        return Projection(base, type_label(name))
    p.err("expected a type")


def _braced_members(p: _P) -> Type:
    p.expect("SYM", "{")
    parts: list[Type] = []
    while True:
        t = p.peek()
        if t.kind != "IDENT":
            p.err("expected a member declaration")
        if _is_upper(t.text):
            name = p.next().text
            if p.accept("SYM", "="):
                ty = _type(p)
                parts.append(TypeDecl(type_label(name), ty, ty))
            else:
                p.expect("SYM", ":")
                lo = _type(p)
                p.expect("SYM", "..")
                hi = _type(p)
                parts.append(TypeDecl(type_label(name), lo, hi))
        else:
            name = _lident(p, "field name")
            p.expect("SYM", ":")
            ty = _type(p)
            parts.append(FieldDecl(term_label(name), ty))
        if p.accept("SYM", ";"):
            if p.at("SYM", "}"):
                break
            continue
        break
    p.expect("SYM", "}")
    return and_types(parts)


def _type(p: _P) -> Type:
    if p.at_word("all"):
        p.next()
        p.expect("SYM", "(")
        x = _lident(p, "parameter")
        p.expect("SYM", ":")
        pt = _type(p)
        p.expect("SYM", ")")
        res = _type(p)
        return Forall(x, pt, res)
    left = _type_atom(p)
    parts = [left]
    while p.accept("SYM", "&"):
        parts.append(_type_atom(p))
    return and_types(parts)


def _definitions(p: _P) -> Definition:
    parts: list[Definition] = []
    if p.at("SYM", "}"):
        return and_defs(parts)
    while True:
        t = p.peek()
        if t.kind != "IDENT":
            p.err("expected a definition")
        if _is_upper(t.text):
            name = p.next().text
            p.expect("SYM", "=")
            ty = _type(p)
            parts.append(TypeDef(type_label(name), ty))
        else:
            name = _lident(p, "field name")
            p.expect("SYM", "=")
            rhs = _term(p)
            parts.append(FieldDef(term_label(name), rhs))
        if p.accept("SYM", ";"):
            if p.at("SYM", "}"):
                break
            continue
        break
    return and_defs(parts)


def _term_atom(p: _P) -> Term:
    if p.at("SYM", "("):
        p.next()
        t = _term(p)
        p.expect("SYM", ")")
        return t
    return _path(p)


def _starts_term_atom(p: _P) -> bool:
    t = p.peek()
    if t.kind == "SYM" and t.text == "(":
        return True
    return t.kind == "IDENT" and _is_lower(t.text) and t.text not in _KEYWORDS


def _term(p: _P) -> Term:
    if p.at_word("let"):
        p.next()
        x = _lident(p, "variable")
        p.expect("SYM", "=")
        bound = _term(p)
        p.expect("IDENT", "in")
        body = _term(p)
        return Let(x, bound, body)
    if p.at_word("lambda"):
        p.next()
        p.expect("SYM", "(")
        x = _lident(p, "parameter")
        p.expect("SYM", ":")
        pt = _type(p)
        p.expect("SYM", ")")
        body = _term(p)
        return Lambda(x, pt, body)
    if p.at_word("nu"):
        p.next()
        p.expect("SYM", "(")
        x = _lident(p, "self name")
        p.expect("SYM", ":")
        st = _type(p)
        p.expect("SYM", ")")
        p.expect("SYM", "[")
        tag = _projection(p)
        p.expect("SYM", "]")
        p.expect("SYM", "{")
        defs = _definitions(p)
        p.expect("SYM", "}")
        return ObjectVal(x, st, tag, defs)
    if p.at_word("case"):
        p.next()
        scrut = _path(p)
        p.expect("IDENT", "of")
        y = _lident(p, "binder")
        p.expect("SYM", ":")
        tag = _projection(p)
        returning = None
        if p.accept("IDENT", "returning"):
            returning = _type(p)
        p.expect("SYM", "=>")
        then = _term(p)
        p.expect("IDENT", "else")
        other = _term(p)
        return Case(scrut, y, tag, then, other, returning)
    head = _term_atom(p)
    if _starts_term_atom(p):
        arg = _term_atom(p)
        if not isinstance(head, Path) or not isinstance(arg, Path):
            p.err("application operands must be paths")
        return Apply(head, arg)
    return head


def parse_term(src: str) -> Term:
    """Parse one object-calculus term, consuming the whole input."""
    p = _P(tokenize(src))
    t = _term(p)
    if not p.at("EOF"):
        p.err("trailing input after term")
    return t


def parse_type(src: str) -> Type:
    """Parse one object-calculus type, consuming the whole input."""
    p = _P(tokenize(src))
    t = _type(p)
    if not p.at("EOF"):
        p.err("trailing input after type")
    return t


# ---------------------------------------------------------------- object-calculus printer


def format_type(ty: Type, prec: int = 0) -> str:
    if isinstance(ty, Top):
        return "Top"
    if isinstance(ty, Bot):
        return "Bot"
    if isinstance(ty, FieldDecl):
        return f"{{{ty.label.name} : {format_type(ty.ty)}}}"
    if isinstance(ty, TypeDecl):
        if alpha_equal(ty.lo, ty.hi):
            return f"{{{ty.label.name} = {format_type(ty.lo)}}}"
        return f"{{{ty.label.name} : {format_type(ty.lo)} .. {format_type(ty.hi)}}}"
    if isinstance(ty, And):
        s = " & ".join(format_type(c, 1) for c in conjuncts(ty))
        return s
    if isinstance(ty, Rec):
        return f"mu ({ty.self_name} : {format_type(ty.body)})"
    if isinstance(ty, Forall):
        s = f"all ({ty.param} : {format_type(ty.param_type)}) {format_type(ty.result)}"
        return f"({s})" if prec > 0 else s
    if isinstance(ty, Projection):
        return f"{format_term(ty.path)}.{ty.label.name}"
    if isinstance(ty, Singleton):
        return f"{format_term(ty.path)}.type"
    return repr(ty)


def format_defs(d: Definition) -> str:
    parts = []
    for item in defs_seq(d):
        if isinstance(item, TypeDef):
            parts.append(f"{item.label.name} = {format_type(item.ty)}")
        elif isinstance(item, FieldDef):
            parts.append(f"{item.label.name} = {format_term(item.rhs)}")
        else:
            parts.append(repr(item))
    return "; ".join(parts)


def format_term(t: Term, prec: int = 0) -> str:
    if isinstance(t, Path):
        return ".".join(t.components())
    if isinstance(t, Apply):
        return f"{format_term(t.fun)} {format_term(t.arg)}"
    if isinstance(t, Lambda):
        s = f"lambda ({t.param} : {format_type(t.param_type)}) {format_term(t.body)}"
        return f"({s})" if prec > 0 else s
    if isinstance(t, ObjectVal):
        s = (f"nu ({t.self_name} : {format_type(t.self_type)}) "
             f"[{format_type(t.tag)}] {{ {format_defs(t.defs)} }}")
        return f"({s})" if prec > 0 else s
    if isinstance(t, Let):
        s = f"let {t.var} = {format_term(t.bound)} in {format_term(t.body)}"
        return f"({s})" if prec > 0 else s
    if isinstance(t, Case):
        then = format_term(t.then_branch)
        if isinstance(t.then_branch, Case):
            then = f"({then})"
        ret = f" returning {format_type(t.returning)}" if t.returning is not None else ""
        s = (f"case {format_term(t.scrutinee)} of {t.binder} : "
             f"{format_type(t.tag)}{ret} => {then} else {format_term(t.else_branch)}")
        return f"({s})" if prec > 0 else s
    return repr(t)


# ---------------------------------------------------------------- GADT parser

_GKEYWORDS = {
    "fun", "tlam", "fix", "let", "in", "matchgadt", "as", "returning",
    "with", "of", "data", "unit", "forall", "fst", "snd", "type",
}


def _g_lident(p: _P, what: str = "name") -> str:
    t = p.peek()
    if t.kind != "IDENT" or not _is_lower(t.text) or t.text in _GKEYWORDS:
        p.err(f"expected lower-case {what}")
    return p.next().text


def _g_uident(p: _P, what: str = "type name") -> str:
    t = p.peek()
    if t.kind != "IDENT" or not _is_upper(t.text):
        p.err(f"expected upper-case {what}")
    return p.next().text


def _gtype(p: _P) -> G.GType:
    if p.at_word("forall"):
        p.next()
        a = _g_lident(p, "type variable")
        p.expect("SYM", ".")
        body = _gtype(p)
        return G.ForallTy(a, body)
    left = _gprod(p)
    if p.accept("SYM", "->"):
        right = _gtype(p)
        return G.Arrow(left, right)
    return left


def _gprod(p: _P) -> G.GType:
    left = _gtype_atom(p)
    while p.accept("SYM", "*"):
        right = _gtype_atom(p)
        left = G.Product(left, right)
    return left


def _gtype_atom(p: _P) -> G.GType:
    t = p.peek()
    if t.kind == "NUM" and t.text == "1":
        p.next()
        return G.UNIT_TY
    if p.at("SYM", "("):
        p.next()
        if p.at("SYM", ")"):
            p.next()
            name = _g_uident(p, "GADT name")
            return G.Applied((), name)
        args = [_gtype(p)]
        while p.accept("SYM", ","):
            args.append(_gtype(p))
        p.expect("SYM", ")")
        if p.peek().kind == "IDENT" and _is_upper(p.peek().text):
            name = p.next().text
            return G.Applied(tuple(args), name)
        if len(args) == 1:
            return args[0]
        p.err("a parenthesized type list must be followed by a GADT name")
    if t.kind == "IDENT" and _is_upper(t.text):
        p.next()
        return G.Applied((), t.text)
    if t.kind == "IDENT" and _is_lower(t.text) and t.text not in _GKEYWORDS:
        p.next()
        return G.TyVar(t.text)
    p.err("expected a type")


def _g_decl(p: _P) -> G.GadtSig:
    p.expect("IDENT", "data")
    arity = 0
    if p.at("SYM", "("):
        p.next()
        p.expect("IDENT", "type")
        arity = 1
        while p.accept("SYM", ","):
            p.expect("IDENT", "type")
            arity += 1
        p.expect("SYM", ")")
    name = _g_uident(p, "GADT name")
    p.expect("SYM", "=")
    alts = [_g_alt(p, name, arity)]
    while p.accept("SYM", "|"):
        alts.append(_g_alt(p, name, arity))
    return G.GadtSig(name, arity, tuple(alts))


def _g_alt(p: _P, gadt: str, arity: int) -> G.CtorSig:
    ty_params: list[str] = []
    if p.at("SYM", "{"):
        p.next()
        ty_params.append(_g_lident(p, "type variable"))
        while p.accept("SYM", ","):
            ty_params.append(_g_lident(p, "type variable"))
        p.expect("SYM", "}")
        p.expect("SYM", ".")
    result_args: list[G.GType] = []
    if p.at("SYM", "("):
        p.next()
        result_args.append(_gtype(p))
        while p.accept("SYM", ","):
            result_args.append(_gtype(p))
        p.expect("SYM", ")")
    cname = _g_lident(p, "constructor name")
    p.expect("IDENT", "of")
    arg_ty = _gtype(p)
    if len(result_args) != arity:
        raise ParseError(
            f"constructor {cname} instantiates {len(result_args)} "
            f"indices but {gadt} declares {arity}")
    return G.CtorSig(cname, tuple(ty_params), arg_ty, tuple(result_args), gadt)


_G_TERM_KEYS = {"fun", "tlam", "fix", "let", "matchgadt"}


def _starts_gatom(p: _P, ctors: set[str]) -> bool:
    t = p.peek()
    if t.kind == "SYM" and t.text in ("<", "("):
        return True
    if t.kind != "IDENT":
        return False
    if t.text in ("unit", "fst", "snd"):
        return True
    return (_is_lower(t.text) and t.text not in _GKEYWORDS)


def _gterm(p: _P, ctors: set[str]) -> G.GTerm:
    t = p.peek()
    if p.at_word("fun"):
        p.next()
        p.expect("SYM", "(")
        x = _g_lident(p, "parameter")
        p.expect("SYM", ":")
        ty = _gtype(p)
        p.expect("SYM", ")")
        body = _gterm(p, ctors)
        return G.GLam(x, ty, body)
    if p.at_word("tlam"):
        p.next()
        a = _g_lident(p, "type variable")
        p.expect("SYM", ".")
        body = _gterm(p, ctors)
        return G.TyLam(a, body)
    if p.at_word("fix"):
        p.next()
        p.expect("SYM", "(")
        f = _g_lident(p, "name")
        p.expect("SYM", ":")
        ty = _gtype(p)
        p.expect("SYM", ")")
        body = _gterm(p, ctors)
        return G.Fix(f, ty, body)
    if p.at_word("let"):
        p.next()
        x = _g_lident(p, "variable")
        p.expect("SYM", "=")
        bound = _gterm(p, ctors)
        p.expect("IDENT", "in")
        body = _gterm(p, ctors)
        return G.LetIn(x, bound, body)
    if p.at_word("matchgadt"):
        p.next()
        scrut = _gterm(p, ctors)
        p.expect("IDENT", "as")
        gname = _g_uident(p, "GADT name")
        p.expect("IDENT", "returning")
        ret = _gtype(p)
        p.expect("IDENT", "with")
        branches = []
        p.expect("SYM", "|")
        branches.append(_g_branch(p, ctors))
        while p.accept("SYM", "|"):
            branches.append(_g_branch(p, ctors))
        return G.MatchGadt(scrut, gname, ret, tuple(branches))
    return _gapp(p, ctors)


def _g_branch(p: _P, ctors: set[str]) -> G.Branch:
    c = _g_lident(p, "constructor name")
    ty_vars: list[str] = []
    if p.at("SYM", "["):
        p.next()
        ty_vars.append(_g_lident(p, "type variable"))
        while p.accept("SYM", ","):
            ty_vars.append(_g_lident(p, "type variable"))
        p.expect("SYM", "]")
    p.expect("SYM", "(")
    x = _g_lident(p, "binder")
    p.expect("SYM", ")")
    p.expect("SYM", "=>")
    body = _gterm(p, ctors)
    return G.Branch(c, tuple(ty_vars), x, body)


def _gapp(p: _P, ctors: set[str]) -> G.GTerm:
    e = _gpostfix(p, ctors)
    while _starts_gatom(p, ctors):
        arg = _gpostfix(p, ctors)
        e = G.GApp(e, arg)
    return e


def _gpostfix(p: _P, ctors: set[str]) -> G.GTerm:
    e = _gatom(p, ctors)
    while p.at("SYM", "["):
        p.next()
        ty = _gtype(p)
        p.expect("SYM", "]")
        e = G.TyApp(e, ty)
    return e


def _gatom(p: _P, ctors: set[str]) -> G.GTerm:
    t = p.peek()
    if p.accept("IDENT", "unit"):
        return G.UNIT
    if p.at_word("fst"):
        p.next()
        return G.Fst(_gpostfix(p, ctors))
    if p.at_word("snd"):
        p.next()
        return G.Snd(_gpostfix(p, ctors))
    if p.at("SYM", "<"):
        p.next()
        left = _gterm(p, ctors)
        p.expect("SYM", ":")
        lt = _gtype(p)
        p.expect("SYM", ",")
        right = _gterm(p, ctors)
        p.expect("SYM", ":")
        rt = _gtype(p)
        p.expect("SYM", ">")
        return G.GTuple(left, lt, right, rt)
    if p.at("SYM", "("):
        p.next()
        e = _gterm(p, ctors)
        p.expect("SYM", ")")
        return e
    if t.kind == "IDENT" and _is_lower(t.text) and t.text not in _GKEYWORDS:
        name = p.next().text
        if name in ctors:
            ty_args: list[G.GType] = []
            if p.at("SYM", "["):
                p.next()
                ty_args.append(_gtype(p))
                while p.accept("SYM", ","):
                    ty_args.append(_gtype(p))
                p.expect("SYM", "]")
            p.expect("SYM", "(")
            arg = _gterm(p, ctors)
            p.expect("SYM", ")")
            return G.Construct(name, tuple(ty_args), arg)
        return G.GVar(name)
    p.err("expected a term")


def parse_gadt_program(src: str) -> tuple[G.Signature, G.GTerm | None]:
    """Parse data declarations followed by an optional program term."""
    p = _P(tokenize(src))
    decls = []
    while p.at_word("data"):
        decls.append(_g_decl(p))
    try:
        sig = G.Signature(decls)
    except ValueError as e:
        raise ParseError(str(e))
    if p.at("EOF"):
        return sig, None
    term = _gterm(p, set(sig.ctors))
    if not p.at("EOF"):
        p.err("trailing input after program term")
    return sig, term


def parse_gterm(src: str, sig: G.Signature) -> G.GTerm:
    p = _P(tokenize(src))
    t = _gterm(p, set(sig.ctors))
    if not p.at("EOF"):
        p.err("trailing input after term")
    return t


# ---------------------------------------------------------------- GADT printer


def format_gtype(ty: G.GType, prec: int = 0) -> str:
    if isinstance(ty, G.UnitTy):
        return "1"
    if isinstance(ty, G.TyVar):
        return ty.name
    if isinstance(ty, G.Arrow):
        s = f"{format_gtype(ty.param, 1)} -> {format_gtype(ty.result)}"
        return f"({s})" if prec > 0 else s
    if isinstance(ty, G.Product):
        s = f"{format_gtype(ty.left, 1)} * {format_gtype(ty.right, 2)}"
        return f"({s})" if prec > 1 else s
    if isinstance(ty, G.ForallTy):
        s = f"forall {ty.var} . {format_gtype(ty.body)}"
        return f"({s})" if prec > 0 else s
    if isinstance(ty, G.Applied):
        if not ty.args:
            return ty.name
        inner = ", ".join(format_gtype(a) for a in ty.args)
        return f"({inner}) {ty.name}"
    return repr(ty)


def format_signature(sig: G.Signature) -> str:
    lines = []
    for g in sig.gadts.values():
        header = g.name if g.arity == 0 else "(" + ", ".join(["type"] * g.arity) + ") " + g.name
        alts = []
        for c in g.ctors:
            s = ""
            if c.ty_params:
                s += "{" + ", ".join(c.ty_params) + "}. "
            if c.result_args:
                s += "(" + ", ".join(format_gtype(a) for a in c.result_args) + ") "
            s += f"{c.name} of {format_gtype(c.arg_ty, 1)}"
            alts.append(s)
        lines.append(f"data {header} = " + " | ".join(alts))
    return "\n".join(lines)


def format_gterm(t: G.GTerm, prec: int = 0) -> str:
    if isinstance(t, G.GVar):
        return t.name
    if isinstance(t, G.UnitVal):
        return "unit"
    if isinstance(t, G.GTuple):
        return (f"<{format_gterm(t.left)} : {format_gtype(t.left_ty)}, "
                f"{format_gterm(t.right)} : {format_gtype(t.right_ty)}>")
    if isinstance(t, G.Fst):
        s = f"fst {format_gterm(t.arg, 2)}"
        return f"({s})" if prec > 1 else s
    if isinstance(t, G.Snd):
        s = f"snd {format_gterm(t.arg, 2)}"
        return f"({s})" if prec > 1 else s
    if isinstance(t, G.GLam):
        s = f"fun ({t.param} : {format_gtype(t.param_ty)}) {format_gterm(t.body)}"
        return f"({s})" if prec > 0 else s
    if isinstance(t, G.GApp):
        s = f"{format_gterm(t.fun, 1)} {format_gterm(t.arg, 2)}"
        return f"({s})" if prec > 1 else s
    if isinstance(t, G.TyLam):
        s = f"tlam {t.var} . {format_gterm(t.body)}"
        return f"({s})" if prec > 0 else s
    if isinstance(t, G.TyApp):
        return f"{format_gterm(t.fun, 2)}[{format_gtype(t.ty)}]"
    if isinstance(t, G.Fix):
        s = f"fix ({t.name} : {format_gtype(t.ty)}) {format_gterm(t.body)}"
        return f"({s})" if prec > 0 else s
    if isinstance(t, G.LetIn):
        s = f"let {t.var} = {format_gterm(t.bound)} in {format_gterm(t.body)}"
        return f"({s})" if prec > 0 else s
    if isinstance(t, G.Construct):
        tys = f"[{', '.join(format_gtype(a) for a in t.ty_args)}]" if t.ty_args else ""
        return f"{t.ctor}{tys}({format_gterm(t.arg)})"
    if isinstance(t, G.MatchGadt):
        brs = " ".join(
            "| " + b.ctor
            + (f"[{', '.join(b.ty_vars)}]" if b.ty_vars else "")
            + f"({b.var}) => {format_gterm(b.body)}"
            for b in t.branches
        )
        s = (f"matchgadt {format_gterm(t.scrutinee, 1)} as {t.gadt_name} "
             f"returning {format_gtype(t.returning)} with {brs}")
        return f"({s})" if prec > 0 else s
    return repr(t)
