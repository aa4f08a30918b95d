"""Recursive-descent parser for the dialog-script language.

Parsing does syntax work only: structural checks such as dangling targets,
band coverage or unreachable nodes live in :mod:`mica.dsl.validate`. The one
semantic thing enforced here is id uniqueness, because a script whose node
map silently collapses duplicates would be misleading to every later stage.
"""

from __future__ import annotations

from ..errors import DuplicateIdError, ScriptSyntaxError
from .lexer import Token, tokenize
from .model import (
    And,
    AgeAtom,
    Band,
    Cond,
    DialogScript,
    Expr,
    FactAtom,
    FlagRule,
    InterceptRule,
    LabelCond,
    Not,
    Option,
    Or,
    ProfileRule,
    QuestionNode,
    RangeCond,
    RiskCountAtom,
    Route,
    ScoreBandAtom,
    ScoreRule,
    Section,
    YesNoCond,
)

RESERVED = frozenset(
    """
    script version start section question yesno choice numeric text help
    riskfactor set option weight when goto end score questions thresholds
    flag profile intercept keywords record and or not fact riskcount scoreband
    """.split()
)


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.seen_ids: dict[str, Token] = {}

    # --- token plumbing ---

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.type != "EOF":
            self.pos += 1
        return tok

    def error(self, expected: str, tok: Token | None = None) -> ScriptSyntaxError:
        tok = tok or self.peek()
        got = f"'{tok.value}'" if tok.type != "EOF" else "end of input"
        return ScriptSyntaxError(tok.line, tok.col, f"expected {expected}, got {got}")

    def at_word(self, *words: str) -> bool:
        tok = self.peek()
        return tok.type == "WORD" and tok.value in words

    def expect_word(self, word: str) -> Token:
        if not self.at_word(word):
            raise self.error(f"'{word}'")
        return self.advance()

    def expect_type(self, type_: str, expected: str) -> Token:
        if self.peek().type != type_:
            raise self.error(expected)
        return self.advance()

    def expect_id(self) -> tuple[str, Token]:
        tok = self.peek()
        if tok.type != "WORD":
            raise self.error("an identifier")
        if tok.value in RESERVED:
            raise ScriptSyntaxError(
                tok.line, tok.col, f"'{tok.value}' is a keyword and cannot be used as an id"
            )
        self.advance()
        return str(tok.value), tok

    def expect_int(self) -> int:
        return int(self.expect_type("INT", "an integer").value)

    def expect_string(self) -> str:
        return str(self.expect_type("STRING", "a string literal").value)

    def claim_id(self, name: str, tok: Token) -> str:
        """Register a declared id, rejecting duplicates across the whole script."""
        if name in self.seen_ids:
            raise DuplicateIdError(tok.line, tok.col, name)
        self.seen_ids[name] = tok
        return name

    # --- grammar ---

    def parse_script(self) -> DialogScript:
        self.expect_word("script")
        name = self.expect_string()
        self.expect_word("version")
        version = self.expect_int()
        if version < 1:
            tok = self.peek(-1)
            raise ScriptSyntaxError(tok.line, tok.col, "version must be a positive integer")
        self.expect_word("start")
        start, _ = self.expect_id()

        sections: list[Section] = []
        scores: list[ScoreRule] = []
        flags: list[FlagRule] = []
        profiles: list[ProfileRule] = []
        intercepts: list[InterceptRule] = []
        while self.peek().type != "EOF":
            if self.at_word("section"):
                sections.append(self.parse_section())
            elif self.at_word("score"):
                scores.append(self.parse_score())
            elif self.at_word("flag"):
                flags.append(self.parse_flag())
            elif self.at_word("profile"):
                profiles.append(self.parse_profile())
            elif self.at_word("intercept"):
                intercepts.append(self.parse_intercept())
            else:
                raise self.error("'section', 'score', 'flag', 'profile' or 'intercept'")
        return DialogScript(
            name=name,
            version=version,
            start=start,
            sections=tuple(sections),
            scores=tuple(scores),
            flags=tuple(flags),
            profiles=tuple(profiles),
            intercepts=tuple(intercepts),
        )

    def parse_section(self) -> Section:
        self.expect_word("section")
        name, tok = self.expect_id()
        self.claim_id(name, tok)
        self.expect_type("LBRACE", "'{'")
        questions: list[QuestionNode] = []
        while not self.peek().type == "RBRACE":
            if not self.at_word("question"):
                raise self.error("'question' or '}'")
            questions.append(self.parse_question(name))
        self.advance()  # RBRACE
        return Section(id=name, questions=tuple(questions))

    def parse_question(self, section: str) -> QuestionNode:
        self.expect_word("question")
        qid, tok = self.expect_id()
        self.claim_id(qid, tok)

        kind_tok = self.peek()
        numeric_range: tuple[int, int] | None = None
        if self.at_word("yesno", "choice", "text"):
            kind = str(self.advance().value)
        elif self.at_word("numeric"):
            self.advance()
            kind = "numeric"
            lo = self.expect_int()
            self.expect_type("DOTDOT", "'..'")
            hi = self.expect_int()
            numeric_range = (lo, hi)
        else:
            raise self.error("a question kind (yesno, choice, numeric, text)", kind_tok)

        prompt = self.expect_string()
        self.expect_word("help")
        help_text = self.expect_string()

        risk_factor = False
        fact_name: str | None = None
        while self.at_word("riskfactor", "set"):
            tag_tok = self.advance()
            if tag_tok.value == "riskfactor":
                if risk_factor:
                    raise ScriptSyntaxError(tag_tok.line, tag_tok.col, "duplicate 'riskfactor' tag")
                risk_factor = True
            else:
                if fact_name is not None:
                    raise ScriptSyntaxError(tag_tok.line, tag_tok.col, "duplicate 'set' tag")
                fact_name, _ = self.expect_id()

        options: list[Option] = []
        while self.at_word("option"):
            self.advance()
            label = self.expect_string()
            weight: int | None = None
            if self.at_word("weight"):
                self.advance()
                weight = self.expect_int()
            options.append(Option(label=label, weight=weight))

        routes: list[Route] = []
        while self.at_word("when", "goto"):
            routes.append(self.parse_route())
        if not routes:
            raise self.error("at least one route ('when ... goto ...' or 'goto ...')")

        return QuestionNode(
            id=qid,
            section=section,
            kind=kind,
            prompt=prompt,
            help=help_text,
            options=tuple(options),
            numeric_range=numeric_range,
            fact_name=fact_name,
            risk_factor=risk_factor,
            routes=tuple(routes),
        )

    def parse_route(self) -> Route:
        if self.at_word("goto"):
            self.advance()
            return Route(cond=None, target=self.parse_target())
        self.expect_word("when")
        cond = self.parse_cond()
        self.expect_word("goto")
        return Route(cond=cond, target=self.parse_target())

    def parse_cond(self) -> Cond:
        tok = self.peek()
        if tok.type == "WORD" and tok.value in ("yes", "no"):
            self.advance()
            return YesNoCond(value=tok.value == "yes")
        if tok.type == "STRING":
            self.advance()
            return LabelCond(label=str(tok.value))
        if tok.type == "INT":
            lo = self.expect_int()
            self.expect_type("DOTDOT", "'..'")
            hi = self.expect_int()
            return RangeCond(lo=lo, hi=hi)
        raise self.error("a route condition (yes, no, a string, or INT..INT)", tok)

    def parse_target(self) -> str:
        tok = self.peek()
        if tok.type == "WORD" and tok.value == "end":
            self.advance()
            return "end"
        name, _ = self.expect_id()
        return name

    def parse_score(self) -> ScoreRule:
        self.expect_word("score")
        sid, tok = self.expect_id()
        self.claim_id(sid, tok)
        self.expect_type("LBRACE", "'{'")
        self.expect_word("questions")
        question_ids: list[str] = []
        while self.peek().type == "WORD" and self.peek().value != "thresholds":
            qid, _ = self.expect_id()
            question_ids.append(qid)
        if not question_ids:
            raise self.error("at least one question id")
        self.expect_word("thresholds")
        self.expect_type("LBRACE", "'{'")
        bands: list[Band] = []
        while self.peek().type != "RBRACE":
            bands.append(self.parse_band())
        self.advance()  # RBRACE
        if not bands:
            raise self.error("at least one threshold band")
        self.expect_type("RBRACE", "'}'")
        return ScoreRule(id=sid, question_ids=tuple(question_ids), bands=tuple(bands))

    def parse_band(self) -> Band:
        name, _ = self.expect_id()
        self.expect_word("when")
        tok = self.peek()
        if tok.type == "LT":
            self.advance()
            return Band(name=name, op="lt", a=self.expect_int())
        if tok.type == "GT":
            self.advance()
            return Band(name=name, op="gt", a=self.expect_int())
        if tok.type == "INT":
            a = self.expect_int()
            self.expect_type("DOTDOT", "'..'")
            b = self.expect_int()
            return Band(name=name, op="between", a=a, b=b)
        raise self.error("a band interval ('< INT', 'INT..INT' or '> INT')", tok)

    def parse_flag(self) -> FlagRule:
        self.expect_word("flag")
        fid, tok = self.expect_id()
        self.claim_id(fid, tok)
        self.expect_word("when")
        return FlagRule(id=fid, expr=self.parse_boolexpr())

    def parse_profile(self) -> ProfileRule:
        self.expect_word("profile")
        pid, tok = self.expect_id()
        self.claim_id(pid, tok)
        self.expect_word("when")
        return ProfileRule(id=pid, expr=self.parse_boolexpr())

    def parse_intercept(self) -> InterceptRule:
        self.expect_word("intercept")
        iid, tok = self.expect_id()
        self.claim_id(iid, tok)
        self.expect_word("keywords")
        keywords: list[str] = []
        while self.peek().type == "STRING":
            keywords.append(self.expect_string())
        if not keywords:
            raise self.error("at least one keyword string")
        self.expect_word("record")
        record_fact, _ = self.expect_id()
        return InterceptRule(id=iid, keywords=tuple(keywords), record_fact=record_fact)

    # `and` binds tighter than `or`; `not` applies to a single atom, so grouping
    # anything looser under a `not` needs parentheses.

    def parse_boolexpr(self) -> Expr:
        terms = [self.parse_and()]
        while self.at_word("or"):
            self.advance()
            terms.append(self.parse_and())
        return terms[0] if len(terms) == 1 else Or(terms=tuple(terms))

    def parse_and(self) -> Expr:
        terms = [self.parse_term()]
        while self.at_word("and"):
            self.advance()
            terms.append(self.parse_term())
        return terms[0] if len(terms) == 1 else And(terms=tuple(terms))

    def parse_term(self) -> Expr:
        if self.at_word("not"):
            self.advance()
            return Not(operand=self.parse_atom())
        return self.parse_atom()

    def parse_atom(self) -> Expr:
        tok = self.peek()
        if tok.type == "LPAREN":
            self.advance()
            expr = self.parse_boolexpr()
            self.expect_type("RPAREN", "')'")
            return expr
        if self.at_word("fact"):
            self.advance()
            self.expect_type("LPAREN", "'('")
            key, _ = self.expect_id()
            self.expect_type("RPAREN", "')'")
            return FactAtom(key=key)
        if self.at_word("riskcount"):
            self.advance()
            self.expect_type("GE", "'>='")
            return RiskCountAtom(min_count=self.expect_int())
        if self.at_word("scoreband"):
            self.advance()
            self.expect_type("LPAREN", "'('")
            score_id, _ = self.expect_id()
            self.expect_type("COMMA", "','")
            band, _ = self.expect_id()
            self.expect_type("RPAREN", "')'")
            return ScoreBandAtom(score_id=score_id, band=band)
        if self.at_word("age"):
            self.advance()
            op_tok = self.peek()
            if op_tok.type not in ("LE", "GE"):
                raise self.error("'<=' or '>=' after 'age'", op_tok)
            self.advance()
            return AgeAtom(op=str(op_tok.value), bound=self.expect_int())
        raise self.error("a predicate (fact(...), riskcount >= N, scoreband(...), age <= N, or '(')", tok)


def parse_script(text: str) -> DialogScript:
    """Parse script text into an AST.

    Raises :class:`ScriptSyntaxError` on malformed input and
    :class:`DuplicateIdError` when an id is declared twice.
    """
    parser = _Parser(tokenize(text))
    if parser.peek().type == "EOF":
        raise ScriptSyntaxError(1, 1, "expected 'script' header, got empty input")
    return parser.parse_script()
