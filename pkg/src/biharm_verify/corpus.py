"""Loading and validating the plain-text corpus directory.

Layout::

    symbols.txt          one symbol per line: name role [jet-count]
    nonvanishing.txt     one polynomial per line, assumed nonzero everywhere
    eq/<ID>.poly         one equation or definition per file
    eq/<ID>.rat          same, but division by polynomials is allowed
    rules/<NAME>.rules   derivation rules, one ``var -> expr`` per line
    steps.registry       tab-separated step table
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .diffring import Derivation, RatFunc
from .parser import ParseError, parse_ast, parse_equation, parse_poly, parse_value
from .poly import Poly, Symbol, SymbolTable


class CorpusError(Exception):
    pass


class MissingFile(CorpusError):
    pass


STEP_KINDS = (
    "identity_zero", "derive_compare", "eliminate_compare", "substitute_compare",
    "expand_compare", "collect_coeffs_compare", "product_compare", "real_root_check",
    "successive_eliminate_check",
)


@dataclass(frozen=True)
class Entry:
    id: str
    value: object  # Poly or RatFunc
    kind: str  # equation | definition
    anchor: str
    nonvanishing: tuple = ()
    path: str = ""
    text: str = ""


@dataclass(frozen=True)
class Step:
    id: str
    kind: str
    inputs: str
    expected: str
    mode: str
    rules: str
    caps: dict
    anchor: str
    line: int = 0

    @property
    def extended(self) -> bool:
        return bool(self.caps.get("extended"))

    @property
    def mode_tokens(self) -> list[str]:
        return self.mode.split()

    def mode_value(self, key: str):
        for tok in self.mode_tokens:
            if tok.startswith(key + "="):
                return tok.split("=", 1)[1]
        return None


@dataclass
class Corpus:
    root: str
    table: SymbolTable
    equations: dict = field(default_factory=dict)
    rules: dict = field(default_factory=dict)
    steps: list = field(default_factory=list)
    nonvanishing: tuple = ()

    def step(self, sid: str) -> Step:
        for s in self.steps:
            if s.id == sid:
                return s
        raise KeyError(sid)


def default_corpus_path() -> Path:
    return Path(str(resources.files("biharm_verify") / "data" / "corpus"))


def _read(path: Path) -> str:
    if not path.is_file():
        raise MissingFile(f"missing file: {path}")
    return path.read_text(encoding="utf-8")


def load_symbols(path: Path) -> SymbolTable:
    syms = []
    for n, raw in enumerate(_read(path).splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        note = raw.split("#", 1)[1].strip() if "#" in raw else ""
        parts = line.split()
        name, role = parts[0], parts[1] if len(parts) > 1 else "base"
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
            raise CorpusError(f"{path}:{n}: bad symbol name {name!r}")
        if role == "jet":
            if len(parts) < 3 or not parts[2].isdigit():
                raise CorpusError(f"{path}:{n}: jet symbol needs a jet count")
            count = int(parts[2])
            syms.append(Symbol(name, 0, "base", note))
            for j in range(1, count + 1):
                syms.append(Symbol(name, j, "jet", note))
        elif role in ("base", "auxiliary"):
            syms.append(Symbol(name, 0, role, note))
        else:
            raise CorpusError(f"{path}:{n}: unknown role {role!r}")
    try:
        return SymbolTable(syms)
    except ValueError as exc:
        raise CorpusError(f"{path}: {exc}") from None


def _split_header(text: str) -> tuple[dict, str]:
    headers = {}
    body = []
    for line in text.splitlines():
        s = line.strip()
        if s.startswith("#"):
            m = re.match(r"#\s*([a-z_]+)\s*:\s*(.*)$", s)
            if m:
                headers[m.group(1)] = m.group(2).strip()
            continue
        body.append(line)
    return headers, "\n".join(body).strip()


def _parse_factor_list(text: str, table: SymbolTable, source: str) -> tuple:
    out = []
    for item in text.split(","):
        item = item.strip()
        if item:
            out.append(parse_poly(item, table, source))
    return tuple(out)


def load_equation(path: Path, table: SymbolTable) -> Entry:
    text = _read(path)
    headers, body = _split_header(text)
    eid = path.stem
    if not body:
        raise CorpusError(f"{path}: empty equation body ({eid})")
    kind = headers.get("kind", "equation")
    if kind not in ("equation", "definition"):
        raise CorpusError(f"{path}: unknown kind {kind!r} ({eid})")
    rational = path.suffix == ".rat"
    try:
        if kind == "definition":
            value = (parse_value if rational else parse_poly)(body, table, str(path))
        else:
            value = parse_equation(body, table, rational=rational, source=str(path))
        nv = _parse_factor_list(headers.get("nonvanishing", ""), table, str(path))
    except (ParseError, ValueError) as exc:
        raise CorpusError(f"equation {eid}: {exc}") from None
    return Entry(eid, value, kind, headers.get("anchor", ""), nv, str(path), body)


def load_rules(path: Path, table: SymbolTable) -> Derivation:
    rules = {}
    jets = True
    for n, raw in enumerate(_read(path).splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("jets:"):
            jets = line.split(":", 1)[1].strip() == "on"
            continue
        if "->" not in line:
            raise CorpusError(f"{path}:{n}: expected 'var -> expression'")
        lhs, rhs = (x.strip() for x in line.split("->", 1))
        if lhs not in table.index:
            raise CorpusError(f"{path}:{n}: unknown symbol {lhs!r}")
        try:
            value = parse_value(rhs, table, f"{path}:{n}")
        except (ParseError, ValueError) as exc:
            raise CorpusError(f"rule set {path.stem}: {exc}") from None
        rules[table.index[lhs]] = RatFunc.lift(value)
    return Derivation(table, rules, jets, path.stem)


def _parse_caps(text: str, where: str) -> dict:
    caps = {}
    if text in ("", "-"):
        return caps
    for item in text.split(","):
        item = item.strip()
        if item == "extended":
            caps["extended"] = True
        elif item.startswith("time="):
            caps["time"] = float(item[5:])
        elif item.startswith("terms="):
            caps["terms"] = int(item[6:])
        else:
            raise CorpusError(f"{where}: unknown cap {item!r}")
    return caps


def load_registry(path: Path) -> list[Step]:
    steps = []
    seen = set()
    for n, raw in enumerate(_read(path).splitlines(), 1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        fields = raw.split("\t")
        if len(fields) != 8:
            raise CorpusError(f"{path}:{n}: expected 8 tab-separated fields, found {len(fields)}")
        sid, kind, inputs, expected, mode, rules, caps, anchor = (f.strip() for f in fields)
        if sid in seen:
            raise CorpusError(f"{path}:{n}: duplicate step id {sid}")
        seen.add(sid)
        if kind not in STEP_KINDS:
            raise CorpusError(f"{path}:{n}: unknown step kind {kind!r} in {sid}")
        steps.append(Step(sid, kind, inputs, "" if expected == "-" else expected, "" if mode == "-" else mode,
                          "" if rules == "-" else rules, _parse_caps(caps, f"{path}:{n}"), anchor, n))
    return steps


def split_inputs(inputs: str) -> tuple[list[str], list[str]]:
    """Split ``a; b; c >> v1, v2`` into expressions and an optional variable order."""
    order = []
    if ">>" in inputs:
        inputs, tail = inputs.split(">>", 1)
        order = [v.strip() for v in tail.split(",") if v.strip()]
    return [p.strip() for p in inputs.split(";") if p.strip()], order


def split_expected(expected: str) -> list[str]:
    return [p.strip() for p in expected.split(";") if p.strip()]


def _refs(node, out):
    if isinstance(node, tuple):
        if node[0] == "ref":
            out.append(node[2])
        for x in node[2:]:
            if isinstance(x, (tuple, list)):
                _refs(x, out)
    elif isinstance(node, list):
        for x in node:
            _refs(x, out)


def expression_refs(text: str) -> list[str]:
    out = []
    _refs(parse_ast(text, allow_calls=True), out)
    return out


def step_refs(step: Step) -> list[str]:
    exprs, _ = split_inputs(step.inputs)
    refs = []
    for e in exprs + split_expected(step.expected):
        refs.extend(expression_refs(e))
    return refs


def load_corpus(directory=None) -> Corpus:
    root = Path(directory) if directory is not None else default_corpus_path()
    if not root.is_dir():
        raise MissingFile(f"corpus directory not found: {root}")
    table = load_symbols(root / "symbols.txt")
    corpus = Corpus(str(root), table)
    nv_text = _read(root / "nonvanishing.txt")
    nv = []
    for n, raw in enumerate(nv_text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            try:
                nv.append(parse_poly(line, table, f"nonvanishing.txt:{n}"))
            except (ParseError, ValueError) as exc:
                raise CorpusError(str(exc)) from None
    corpus.nonvanishing = tuple(nv)
    eq_dir = root / "eq"
    if not eq_dir.is_dir():
        raise MissingFile(f"missing directory: {eq_dir}")
    for path in sorted(eq_dir.iterdir()):
        if path.suffix not in (".poly", ".rat"):
            continue
        entry = load_equation(path, table)
        if entry.id in corpus.equations:
            raise CorpusError(f"duplicate equation id {entry.id}")
        corpus.equations[entry.id] = entry
    rules_dir = root / "rules"
    if rules_dir.is_dir():
        for path in sorted(rules_dir.glob("*.rules")):
            corpus.rules[path.stem] = load_rules(path, table)
    corpus.steps = load_registry(root / "steps.registry")
    validate(corpus)
    return corpus


def validate(corpus: Corpus) -> None:
    step_ids = {s.id for s in corpus.steps}
    for s in corpus.steps:
        try:
            refs = step_refs(s)
        except (ParseError, ValueError) as exc:
            raise CorpusError(f"step {s.id}: {exc}") from None
        for r in refs:
            if r.startswith("@"):
                if r[1:] not in step_ids:
                    raise CorpusError(f"step {s.id}: unknown step reference {r}")
            elif r not in corpus.equations:
                raise CorpusError(f"step {s.id}: unknown equation id {r}")
        exprs, order = split_inputs(s.inputs)
        for v in order:
            if v not in corpus.table.index:
                raise CorpusError(f"step {s.id}: unknown symbol {v!r} in elimination order")
        if s.rules and s.rules not in corpus.rules:
            raise CorpusError(f"step {s.id}: unknown rule set {s.rules!r}")
        if s.kind in ("collect_coeffs_compare", "product_compare"):
            if len(exprs) != len(split_expected(s.expected)):
                raise CorpusError(f"step {s.id}: {len(exprs)} inputs but {len(split_expected(s.expected))} expected values")
        if s.kind == "successive_eliminate_check" and not order:
            raise CorpusError(f"step {s.id}: elimination order missing (use '>> v1, v2')")
