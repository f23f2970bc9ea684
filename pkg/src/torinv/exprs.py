"""The text grammar for lattices, used by the CLI and by corpus files.

    expr   := term { "(+)" term }
    term   := atom { "(x)" atom }
    atom   := "Z" [ "[" GROUP "/" SUBREF "]" ]
            | "dual(" expr ")" | "sym(" expr "," INT ")"
            | "wedge(" expr "," INT ")" | "norm_one(" GROUP ")"
            | "explicit(" PATH ")" | "(" expr ")"

"(x)" binds tighter than "(+)"; both associate to the left.  GROUP is a
builtin name (C<n>, S3, D4, Q8).  SUBREF names a subgroup of that group:
"1" for the trivial subgroup, "G" for the whole group, or "s<k>" for the
k-th entry of the canonical subgroup enumeration (sorted by order, then by
element tuple; s0 is always the trivial subgroup).  A bare "Z" is the
rank-1 trivial lattice over the ambient group, which must then be supplied
by context.

explicit(path) loads a JSON file with fields {"group": <name>,
"generator_matrices": [[...row-major...], ...], "basis_labels": [...]?},
one matrix per group generator.
"""

from __future__ import annotations

import json
import os
import re

from .glattice import (
    InvalidSpec,
    builtin_group,
    direct_sum,
    dual_lattice,
    enumerate_subgroups,
    explicit_lattice,
    perm_lattice,
    sym_power,
    tensor_lattice,
    trivial_lattice,
    wedge_power,
)
from .tori import norm_one_lattice

# the word class also covers path chunks for explicit(...); the parser
# reassembles a path from consecutive tokens up to the closing paren
_TOKEN_RE = re.compile(
    r"\s*(\(\+\)|\(x\)|\(|\)|\[|\]|/|,|[A-Za-z0-9_.\-]+)")

_FUNCS = ("dual", "sym", "wedge", "norm_one", "explicit")


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise InvalidSpec(f"cannot tokenize {text[pos:]!r}")
            break
        out.append(m.group(1))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text, group=None, base_dir=None):
        self.text = text
        self.toks = _tokenize(text)
        self.pos = 0
        self.group = group
        self.base_dir = base_dir

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None:
            raise InvalidSpec(f"unexpected end of expression {self.text!r}")
        if expected is not None and tok != expected:
            raise InvalidSpec(f"expected {expected!r}, found {tok!r} in {self.text!r}")
        self.pos += 1
        return tok

    def ambient(self):
        if self.group is None:
            raise InvalidSpec(
                f"expression {self.text!r} needs a group from context")
        return self.group

    def bind_group(self, name):
        g = builtin_group(name)
        if self.group is None:
            self.group = g
        elif self.group != g:
            raise InvalidSpec(
                f"group {name} conflicts with the ambient group in {self.text!r}")
        return g

    def parse(self):
        lat = self.expr()
        if self.peek() is not None:
            raise InvalidSpec(f"trailing tokens at {self.toks[self.pos:]} in {self.text!r}")
        return lat

    def expr(self):
        lat = self.term()
        while self.peek() == "(+)":
            self.take()
            lat = direct_sum(lat, self.term())
        return lat

    def term(self):
        lat = self.atom()
        while self.peek() == "(x)":
            self.take()
            lat = tensor_lattice(lat, self.atom())
        return lat

    def atom(self):
        tok = self.peek()
        if tok == "(":
            self.take()
            lat = self.expr()
            self.take(")")
            return lat
        if tok == "Z":
            self.take()
            if self.peek() == "[":
                self.take()
                g = self.bind_group(self.take())
                self.take("/")
                sub = self.subref(g)
                self.take("]")
                return perm_lattice(g, sub)
            return trivial_lattice(self.ambient(), 1)
        if tok in _FUNCS:
            self.take()
            self.take("(")
            if tok == "dual":
                lat = dual_lattice(self.expr())
            elif tok in ("sym", "wedge"):
                inner = self.expr()
                self.take(",")
                q = int(self.take())
                lat = sym_power(inner, q) if tok == "sym" else wedge_power(inner, q)
            elif tok == "norm_one":
                g = self.bind_group(self.take())
                lat = norm_one_lattice(g).lattice
            else:  # explicit
                path = self.take()
                while self.peek() not in (")", None):
                    path += self.take()
                lat = _load_explicit(path, self.base_dir, self)
            self.take(")")
            return lat
        raise InvalidSpec(f"unexpected token {tok!r} in {self.text!r}")

    def subref(self, group):
        tok = self.take()
        subs = enumerate_subgroups(group)
        if tok == "1":
            return subs[0]
        if tok == "G":
            return subs[-1]
        if tok.startswith("s") and tok[1:].isdigit():
            k = int(tok[1:])
            if k >= len(subs):
                raise InvalidSpec(
                    f"{group.name} has {len(subs)} subgroups, no index {k}")
            return subs[k]
        raise InvalidSpec(f"bad subgroup reference {tok!r} (use 1, G or s<k>)")


def _load_explicit(path, base_dir, parser):
    if base_dir is not None and not os.path.isabs(path):
        path = os.path.join(base_dir, path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as e:
        raise InvalidSpec(f"cannot read explicit lattice file {path!r}: {e}") from e
    except json.JSONDecodeError as e:
        raise InvalidSpec(f"bad JSON in {path!r}: {e}") from e
    g = parser.bind_group(doc["group"])
    return explicit_lattice(g, doc["generator_matrices"],
                            basis_labels=doc.get("basis_labels"))


def parse_lattice_expr(text, group=None, base_dir=None):
    """Parse an expression into a GLattice; ``group`` supplies the ambient
    group when the expression does not pin one itself."""
    return _Parser(text, group=group, base_dir=base_dir).parse()


def parse_torus_expr(text, group=None, base_dir=None):
    """Parse an expression into a TorusLattice, keeping family provenance.

    Sums of norm_one(...) atoms keep the quasi-trivial family datum needed
    by the special-family reports; anything else is wrapped as an explicit
    torus lattice.
    """
    from .tori import TorusLattice

    stripped = text.strip()
    parts = _split_top_level_sum(stripped)
    toruses = []
    for part in parts:
        m = re.fullmatch(r"norm_one\s*\(\s*([A-Za-z0-9_]+)\s*\)", part.strip())
        if m is None:
            toruses = None
            break
        toruses.append(norm_one_lattice(builtin_group(m.group(1))))
    if toruses:
        total = toruses[0]
        for t in toruses[1:]:
            total = total.direct_sum(t)
        return total
    lat = parse_lattice_expr(stripped, group=group, base_dir=base_dir)
    return TorusLattice(lat, "explicit")


def _split_top_level_sum(text):
    toks = _tokenize(text)
    parts, cur, depth = [], [], 0
    for t in toks:
        if t == "(":
            depth += 1
        elif t == ")":
            depth -= 1
        if t == "(+)" and depth == 0:
            parts.append(" ".join(cur))
            cur = []
        else:
            cur.append(t)
    parts.append(" ".join(cur))
    return parts
