//! Lexer and recursive-descent parsers for formulas, theory/scenario
//! files, and model files. See docs/grammar.md for the surface syntax.
//!
//! Sort checking happens during the parse: every term position has an
//! expected sort, binder sorts are inferred from use (or annotated with
//! `: object` / `: time`), and one name keeps one sort for the whole
//! formula.

use std::collections::BTreeMap;

use crate::semantics::{DalModel, Value, World};
use crate::syntax::{
    ActionOp, ActionTerm, CaseDecl, Formula, Signature, Sort, SyntaxError, Term, TheoryFile, Var,
};
use crate::temporal::{CmpOp, Rat, TimeAtom, TimeConstraint, TimeExpr};

/// Parser behavior switches.
#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Declare unknown predicates, actions, and constants on first use
    /// (argument sorts guessed from the tokens). Meant for quick
    /// command-line formulas; theory files declare explicitly.
    pub auto_declare: bool,
    /// Allow free variables: an unbound, undeclared identifier in a
    /// term position becomes a variable of the expected sort. Used for
    /// action laws.
    pub allow_free: bool,
}

impl ParseOptions {
    pub fn strict() -> Self {
        ParseOptions::default()
    }

    pub fn auto() -> Self {
        ParseOptions { auto_declare: true, allow_free: false }
    }

    pub fn free() -> Self {
        ParseOptions { auto_declare: false, allow_free: true }
    }
}

/// Parses one formula. The signature is extended in place when
/// `opts.auto_declare` is set.
pub fn parse_formula(
    text: &str,
    sig: &mut Signature,
    opts: ParseOptions,
) -> Result<Formula, SyntaxError> {
    let toks = lex(text, false)?;
    let mut p = Parser::new(toks, sig, opts);
    let phi = p.formula()?;
    p.expect_end()?;
    Ok(phi)
}

/// Parses a theory / scenario file.
pub fn parse_theory(text: &str) -> Result<TheoryFile, SyntaxError> {
    let toks = lex(text, true)?;
    let mut file = TheoryFile::default();
    let mut p = Parser::new(toks, &mut file.sig, ParseOptions::strict());
    let mut axioms = Vec::new();
    let mut laws = Vec::new();
    let mut facts = Vec::new();
    let mut occurrences = Vec::new();
    let mut fluents = Vec::new();
    let mut constraints = Vec::new();
    let mut bindings = BTreeMap::new();
    let mut cases = Vec::new();
    loop {
        p.skip_newlines();
        if p.at_end() {
            break;
        }
        let kw = p.keyword()?;
        match kw.as_str() {
            "sort" => {
                p.sort_name()?;
            }
            "const" => p.const_decl()?,
            "pred" => p.symbol_decl(SymbolKind::Pred)?,
            "action" => p.symbol_decl(SymbolKind::Action)?,
            "func" => p.symbol_decl(SymbolKind::Func)?,
            "fluent" => fluents.push(p.fluent_decl()?),
            "axiom" => axioms.push(p.statement_formula(ParseOptions::free())?),
            "law" => laws.push(p.statement_formula(ParseOptions::free())?),
            "fact" => facts.push(p.grounded_statement_formula()?),
            "occurs" => occurrences.push(p.occurs_decl()?),
            "constraint" => constraints.push(p.constraint_decl()?),
            "bind" => {
                let (name, value) = p.bind_decl()?;
                bindings.insert(name, value);
            }
            "case" => cases.push(p.case_block()?),
            "world" | "rel" | "act" | "holds" | "time" => {
                return Err(p.err_at_prev(format!(
                    "`{}` lines belong to model files, not theories",
                    kw
                )));
            }
            other => {
                return Err(p.err_at_prev(format!("unknown declaration `{}`", other)));
            }
        }
        p.end_statement()?;
    }
    file.axioms = axioms;
    file.laws = laws;
    file.facts = facts;
    file.occurrences = occurrences;
    file.fluents = fluents;
    file.constraints = constraints;
    file.bindings = bindings;
    file.cases = cases;
    Ok(file)
}

/// Parses a model file: signature declarations plus `world`, `time`,
/// `rel`, `act`, and `holds` lines.
pub fn parse_model_file(text: &str) -> Result<(Signature, DalModel), SyntaxError> {
    let toks = lex(text, true)?;
    let mut sig = Signature::default();
    let mut model = DalModel::default();
    let mut world_ids: BTreeMap<String, World> = BTreeMap::new();
    {
        let mut p = Parser::new(toks, &mut sig, ParseOptions::strict());
        loop {
            p.skip_newlines();
            if p.at_end() {
                break;
            }
            let kw = p.keyword()?;
            match kw.as_str() {
                "sort" => {
                    p.sort_name()?;
                }
                "const" => p.const_decl()?,
                "pred" => p.symbol_decl(SymbolKind::Pred)?,
                "action" => p.symbol_decl(SymbolKind::Action)?,
                "func" => p.symbol_decl(SymbolKind::Func)?,
                "world" => p.world_decl(&mut model, &mut world_ids)?,
                "time" => p.stamp_decl(&mut model, &world_ids)?,
                "rel" => p.rel_decl(&mut model, &world_ids)?,
                "act" => p.act_decl(&mut model, &world_ids)?,
                "holds" => p.holds_decl(&mut model, &world_ids)?,
                other => {
                    return Err(p.err_at_prev(format!("unknown model line `{}`", other)));
                }
            }
            p.end_statement()?;
        }
    }
    model.domain = sig.object_consts.clone();
    model.sig = sig.clone();
    Ok((sig, model))
}

#[derive(Clone, Copy, PartialEq)]
enum SymbolKind {
    Pred,
    Action,
    Func,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(i64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Tilde,
    AndOp,
    OrOp,
    Arrow,
    IffOp,
    Lt,
    Le,
    EqOp,
    Gt,
    Plus,
    Minus,
    Star,
    Slash,
    Newline,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{}`", s),
            Tok::Num(n) => format!("`{}`", n),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::AndOp => "`/\\`".into(),
            Tok::OrOp => "`\\/`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::IffOp => "`<->`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::EqOp => "`=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    offset: usize,
    line: usize,
    column: usize,
}

fn lex(text: &str, keep_newlines: bool) -> Result<Vec<Spanned>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    macro_rules! push {
        ($tok:expr, $offset:expr, $col:expr, $len:expr) => {{
            out.push(Spanned { tok: $tok, offset: $offset, line, column: $col });
            i += $len;
            col += $len;
        }};
    }
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\r' => {
                i += 1;
                col += 1;
            }
            b'\n' => {
                if keep_newlines {
                    out.push(Spanned { tok: Tok::Newline, offset: i, line, column: col });
                }
                i += 1;
                line += 1;
                col = 1;
            }
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'(' => push!(Tok::LParen, i, col, 1),
            b')' => push!(Tok::RParen, i, col, 1),
            b'[' => push!(Tok::LBracket, i, col, 1),
            b']' => push!(Tok::RBracket, i, col, 1),
            b'{' => push!(Tok::LBrace, i, col, 1),
            b'}' => push!(Tok::RBrace, i, col, 1),
            b',' => push!(Tok::Comma, i, col, 1),
            b';' => push!(Tok::Semi, i, col, 1),
            b':' => push!(Tok::Colon, i, col, 1),
            b'~' => push!(Tok::Tilde, i, col, 1),
            b'+' => push!(Tok::Plus, i, col, 1),
            b'*' => push!(Tok::Star, i, col, 1),
            b'=' => push!(Tok::EqOp, i, col, 1),
            b'>' => push!(Tok::Gt, i, col, 1),
            b'-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    push!(Tok::Arrow, i, col, 2)
                } else {
                    push!(Tok::Minus, i, col, 1)
                }
            }
            b'<' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    push!(Tok::Le, i, col, 2)
                } else if bytes.get(i + 1) == Some(&b'-') && bytes.get(i + 2) == Some(&b'>') {
                    push!(Tok::IffOp, i, col, 3)
                } else {
                    push!(Tok::Lt, i, col, 1)
                }
            }
            b'/' => {
                if bytes.get(i + 1) == Some(&b'\\') {
                    push!(Tok::AndOp, i, col, 2)
                } else {
                    push!(Tok::Slash, i, col, 1)
                }
            }
            b'\\' => {
                if bytes.get(i + 1) == Some(&b'/') {
                    push!(Tok::OrOp, i, col, 2)
                } else {
                    return Err(SyntaxError::Parse {
                        offset: i,
                        line,
                        column: col,
                        message: "stray `\\` (did you mean `\\/`?)".into(),
                    });
                }
            }
            b'0'..=b'9' => {
                let start = i;
                let start_col = col;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                    col += 1;
                }
                let digits = &text[start..i];
                let value: i64 = digits.parse().map_err(|_| SyntaxError::Parse {
                    offset: start,
                    line,
                    column: start_col,
                    message: format!("numeral `{}` does not fit in 64 bits", digits),
                })?;
                out.push(Spanned { tok: Tok::Num(value), offset: start, line, column: start_col });
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                let start_col = col;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'')
                {
                    i += 1;
                    col += 1;
                }
                out.push(Spanned {
                    tok: Tok::Ident(text[start..i].to_string()),
                    offset: start,
                    line,
                    column: start_col,
                });
            }
            other => {
                return Err(SyntaxError::Parse {
                    offset: i,
                    line,
                    column: col,
                    message: format!("unexpected character `{}`", other as char),
                });
            }
        }
    }
    out.push(Spanned { tok: Tok::Eof, offset: bytes.len(), line, column: col });
    Ok(out)
}

struct Binder {
    name: String,
    sort: Option<Sort>,
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    i: usize,
    sig: &'a mut Signature,
    opts: ParseOptions,
    binders: Vec<Binder>,
    free_sorts: BTreeMap<String, Sort>,
}

impl<'a> Parser<'a> {
    fn new(toks: Vec<Spanned>, sig: &'a mut Signature, opts: ParseOptions) -> Self {
        Parser { toks, i: 0, sig, opts, binders: Vec::new(), free_sorts: BTreeMap::new() }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.i + 1).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].tok.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err(&self, message: impl Into<String>) -> SyntaxError {
        let s = &self.toks[self.i];
        SyntaxError::Parse {
            offset: s.offset,
            line: s.line,
            column: s.column,
            message: message.into(),
        }
    }

    fn err_at_prev(&self, message: impl Into<String>) -> SyntaxError {
        let s = &self.toks[self.i.saturating_sub(1)];
        SyntaxError::Parse {
            offset: s.offset,
            line: s.line,
            column: s.column,
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), SyntaxError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected {}, found {}", tok.describe(), self.peek().describe())))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => Err(self.err(format!("expected {}, found {}", what, other.describe()))),
        }
    }

    fn at_end(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn at_statement_end(&self) -> bool {
        matches!(self.peek(), Tok::Newline | Tok::Eof)
    }

    fn skip_newlines(&mut self) {
        while matches!(self.peek(), Tok::Newline) {
            self.bump();
        }
    }

    fn end_statement(&mut self) -> Result<(), SyntaxError> {
        if self.at_statement_end() {
            if matches!(self.peek(), Tok::Newline) {
                self.bump();
            }
            Ok(())
        } else {
            Err(self.err(format!("unexpected {} after statement", self.peek().describe())))
        }
    }

    fn expect_end(&mut self) -> Result<(), SyntaxError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err(format!("unexpected {} after formula", self.peek().describe())))
        }
    }

    fn keyword(&mut self) -> Result<String, SyntaxError> {
        self.ident("a declaration keyword")
    }

    // ---- declarations ----

    fn sort_name(&mut self) -> Result<Sort, SyntaxError> {
        let name = self.ident("a sort name")?;
        match name.as_str() {
            "object" => Ok(Sort::Object),
            "time" => Ok(Sort::Time),
            other => Err(self.err_at_prev(format!(
                "unknown sort `{}` (the sorts are `object` and `time`)",
                other
            ))),
        }
    }

    fn const_decl(&mut self) -> Result<(), SyntaxError> {
        let mut names = vec![self.ident("a constant name")?];
        while matches!(self.peek(), Tok::Comma) {
            self.bump();
            names.push(self.ident("a constant name")?);
        }
        self.expect(Tok::Colon)?;
        let sort = self.sort_name()?;
        for name in names {
            match sort {
                Sort::Object => self.sig.add_object_const(name)?,
                Sort::Time => self.sig.add_time_const(name)?,
            }
        }
        Ok(())
    }

    fn symbol_decl(&mut self, kind: SymbolKind) -> Result<(), SyntaxError> {
        let name = self.ident("a symbol name")?;
        let mut sorts = Vec::new();
        if matches!(self.peek(), Tok::LParen) {
            self.bump();
            if !matches!(self.peek(), Tok::RParen) {
                sorts.push(self.sort_name()?);
                while matches!(self.peek(), Tok::Comma) {
                    self.bump();
                    sorts.push(self.sort_name()?);
                }
            }
            self.expect(Tok::RParen)?;
        }
        match kind {
            SymbolKind::Pred => self.sig.add_predicate(name, sorts)?,
            SymbolKind::Action => self.sig.add_action(name, sorts)?,
            SymbolKind::Func => self.sig.add_function(name, sorts)?,
        }
        Ok(())
    }

    fn fluent_decl(&mut self) -> Result<String, SyntaxError> {
        let name = self.ident("a predicate name")?;
        let sorts = self
            .sig
            .predicates
            .get(&name)
            .ok_or_else(|| SyntaxError::Undeclared(name.clone()))?;
        if !sorts.contains(&Sort::Time) {
            return Err(self.err_at_prev(format!(
                "fluent `{}` must have a time argument position",
                name
            )));
        }
        Ok(name)
    }

    fn statement_formula(&mut self, opts: ParseOptions) -> Result<Formula, SyntaxError> {
        let saved = self.opts;
        self.opts = opts;
        self.free_sorts.clear();
        let phi = self.formula();
        self.opts = saved;
        let phi = phi?;
        if !self.at_statement_end() {
            return Err(self.err(format!("unexpected {} after formula", self.peek().describe())));
        }
        Ok(phi)
    }

    fn grounded_statement_formula(&mut self) -> Result<Formula, SyntaxError> {
        let phi = self.statement_formula(ParseOptions::strict())?;
        if !phi.is_grounded() {
            return Err(self.err_at_prev("facts must be grounded (no free variables)"));
        }
        Ok(phi)
    }

    fn occurs_decl(&mut self) -> Result<ActionTerm, SyntaxError> {
        let a = self.action_term()?;
        if !a.is_grounded() {
            return Err(self.err_at_prev("occurrences must be grounded"));
        }
        Ok(a)
    }

    fn constraint_decl(&mut self) -> Result<TimeConstraint, SyntaxError> {
        let lhs = self.time_expr(None)?;
        let op = self.cmp_op()?;
        let rhs = self.time_expr(None)?;
        Ok(TimeConstraint::new(&lhs, op, &rhs))
    }

    fn bind_decl(&mut self) -> Result<(String, Rat), SyntaxError> {
        let name = self.ident("a time constant")?;
        if !self.sig.is_time_const(&name) {
            return Err(SyntaxError::Undeclared(name));
        }
        self.expect(Tok::EqOp)?;
        let value = self.rational()?;
        Ok((name, value))
    }

    fn case_block(&mut self) -> Result<CaseDecl, SyntaxError> {
        let name = self.ident("a case name")?;
        self.expect(Tok::LBrace)?;
        let mut case = CaseDecl { name, ..CaseDecl::default() };
        loop {
            self.skip_newlines();
            if matches!(self.peek(), Tok::RBrace) {
                self.bump();
                break;
            }
            if self.at_end() {
                return Err(self.err("unterminated case block (missing `}`)"));
            }
            let kw = self.keyword()?;
            match kw.as_str() {
                "constraint" => case.constraints.push(self.constraint_decl()?),
                "bind" => {
                    let (name, value) = self.bind_decl()?;
                    case.bindings.insert(name, value);
                }
                "query" => case.queries.push(self.statement_formula(ParseOptions::strict())?),
                other => {
                    return Err(self.err_at_prev(format!(
                        "unknown case line `{}` (expected constraint, bind, or query)",
                        other
                    )));
                }
            }
            self.end_statement()?;
        }
        Ok(case)
    }

    fn rational(&mut self) -> Result<Rat, SyntaxError> {
        let negative = if matches!(self.peek(), Tok::Minus) {
            self.bump();
            true
        } else {
            false
        };
        let numer = match self.bump() {
            Tok::Num(n) => n,
            other => return Err(self.err_at_prev(format!(
                "expected a numeral, found {}",
                other.describe()
            ))),
        };
        let mut value = Rat::from_integer(numer);
        if matches!(self.peek(), Tok::Slash) {
            self.bump();
            let denom = match self.bump() {
                Tok::Num(n) if n != 0 => n,
                Tok::Num(_) => return Err(self.err_at_prev("zero denominator".to_string())),
                other => return Err(self.err_at_prev(format!(
                    "expected a denominator, found {}",
                    other.describe()
                ))),
            };
            value = Rat::new(numer, denom);
        }
        Ok(if negative { -value } else { value })
    }

    // ---- model lines ----

    fn world_decl(
        &mut self,
        model: &mut DalModel,
        ids: &mut BTreeMap<String, World>,
    ) -> Result<(), SyntaxError> {
        loop {
            let name = self.ident("a world name")?;
            if ids.contains_key(&name) {
                return Err(SyntaxError::Duplicate(name));
            }
            let w = World(model.world_count);
            model.world_count += 1;
            model.world_names.push(name.clone());
            ids.insert(name, w);
            if matches!(self.peek(), Tok::Comma) {
                self.bump();
            } else {
                break;
            }
        }
        Ok(())
    }

    fn world_ref(&mut self, ids: &BTreeMap<String, World>) -> Result<World, SyntaxError> {
        let name = self.ident("a world name")?;
        ids.get(&name).copied().ok_or(SyntaxError::Undeclared(name))
    }

    fn stamp_decl(
        &mut self,
        model: &mut DalModel,
        ids: &BTreeMap<String, World>,
    ) -> Result<(), SyntaxError> {
        let w = self.world_ref(ids)?;
        self.expect(Tok::EqOp)?;
        let q = self.rational()?;
        model.stamps.insert(w, q);
        Ok(())
    }

    fn rel_decl(
        &mut self,
        model: &mut DalModel,
        ids: &BTreeMap<String, World>,
    ) -> Result<(), SyntaxError> {
        let name = self.ident("`R`")?;
        if name != "R" {
            return Err(self.err_at_prev("the accessibility relation is named `R`"));
        }
        self.expect(Tok::Colon)?;
        let from = self.world_ref(ids)?;
        self.expect(Tok::Arrow)?;
        let to = self.world_ref(ids)?;
        model.rel.insert((from, to));
        Ok(())
    }

    fn ground_value(&mut self, expected: Sort) -> Result<Value, SyntaxError> {
        match expected {
            Sort::Time => Ok(Value::Time(self.rational()?)),
            Sort::Object => {
                let name = self.ident("an object constant")?;
                if !self.sig.is_object_const(&name) {
                    return Err(SyntaxError::Undeclared(name));
                }
                Ok(Value::Obj(name))
            }
        }
    }

    fn ground_args(&mut self, sorts: &[Sort]) -> Result<Vec<Value>, SyntaxError> {
        let mut args = Vec::new();
        if matches!(self.peek(), Tok::LParen) {
            self.bump();
            if !matches!(self.peek(), Tok::RParen) {
                loop {
                    let idx = args.len();
                    let expected = sorts.get(idx).copied().ok_or_else(|| {
                        self.err(format!("too many arguments (expected {})", sorts.len()))
                    })?;
                    args.push(self.ground_value(expected)?);
                    if matches!(self.peek(), Tok::Comma) {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen)?;
        }
        if args.len() != sorts.len() {
            return Err(self.err(format!(
                "expected {} argument(s), got {}",
                sorts.len(),
                args.len()
            )));
        }
        Ok(args)
    }

    fn act_decl(
        &mut self,
        model: &mut DalModel,
        ids: &BTreeMap<String, World>,
    ) -> Result<(), SyntaxError> {
        let name = self.ident("an action symbol")?;
        let sorts = self
            .sig
            .actions
            .get(&name)
            .cloned()
            .ok_or_else(|| SyntaxError::Undeclared(name.clone()))?;
        let args = self.ground_args(&sorts)?;
        self.expect(Tok::Colon)?;
        let from = self.world_ref(ids)?;
        self.expect(Tok::Arrow)?;
        let mut targets = std::collections::BTreeSet::new();
        if matches!(self.peek(), Tok::LBrace) {
            self.bump();
            if !matches!(self.peek(), Tok::RBrace) {
                loop {
                    targets.insert(self.world_ref(ids)?);
                    if matches!(self.peek(), Tok::Comma) {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RBrace)?;
        } else {
            targets.insert(self.world_ref(ids)?);
        }
        model
            .acts
            .entry(name)
            .or_default()
            .entry((from, args))
            .or_default()
            .extend(targets);
        Ok(())
    }

    fn holds_decl(
        &mut self,
        model: &mut DalModel,
        ids: &BTreeMap<String, World>,
    ) -> Result<(), SyntaxError> {
        let w = self.world_ref(ids)?;
        self.expect(Tok::Colon)?;
        let name = self.ident("a predicate symbol")?;
        let sorts = self
            .sig
            .predicates
            .get(&name)
            .cloned()
            .ok_or_else(|| SyntaxError::Undeclared(name.clone()))?;
        let args = self.ground_args(&sorts)?;
        model.preds.entry(name).or_default().insert((w, args));
        Ok(())
    }

    // ---- formulas ----

    fn formula(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.implication()?;
        while matches!(self.peek(), Tok::IffOp) {
            self.bump();
            let rhs = self.implication()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Formula, SyntaxError> {
        let lhs = self.disjunction()?;
        if matches!(self.peek(), Tok::Arrow) {
            self.bump();
            let rhs = self.implication()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.conjunction()?;
        while matches!(self.peek(), Tok::OrOp) {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.unary()?;
        while matches!(self.peek(), Tok::AndOp) {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LBracket => {
                self.bump();
                let op = self.action_operator(Tok::RBracket)?;
                Ok(Formula::act(op, self.unary()?))
            }
            Tok::Lt => {
                self.bump();
                let op = self.action_operator(Tok::Gt)?;
                Ok(Formula::dia_act(op, self.unary()?))
            }
            Tok::Ident(name) => match name.as_str() {
                "box" => {
                    self.bump();
                    Ok(Formula::boxed(self.unary()?))
                }
                "dia" => {
                    self.bump();
                    Ok(Formula::dia(self.unary()?))
                }
                "forall" | "exists" => {
                    self.bump();
                    self.quantifier(name == "forall")
                }
                _ => self.primary(),
            },
            _ => self.primary(),
        }
    }

    fn quantifier(&mut self, universal: bool) -> Result<Formula, SyntaxError> {
        let name = self.ident("a variable name")?;
        if !self.sig.name_free(&name) {
            return Err(self.err_at_prev(format!(
                "binder `{}` shadows a declared symbol",
                name
            )));
        }
        let mut annotated = None;
        if matches!(self.peek(), Tok::Colon) {
            self.bump();
            annotated = Some(self.sort_name()?);
        }
        self.binders.push(Binder { name: name.clone(), sort: annotated });
        let body = self.unary();
        let binder = self.binders.pop().expect("binder stack balanced");
        let body = body?;
        let sort = binder.sort.ok_or(SyntaxError::CannotInfer(name.clone()))?;
        let var = Var { name, sort };
        Ok(if universal { Formula::forall(var, body) } else { Formula::exists(var, body) })
    }

    fn primary(&mut self) -> Result<Formula, SyntaxError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let phi = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(phi)
            }
            Tok::Num(_) | Tok::Minus => self.comparison(None),
            Tok::Ident(name) => match name.as_str() {
                "true" => {
                    self.bump();
                    Ok(Formula::True)
                }
                "false" => {
                    self.bump();
                    Ok(Formula::False)
                }
                _ => {
                    self.bump();
                    if matches!(self.peek(), Tok::LParen) {
                        return self.applied_atom(name);
                    }
                    if matches!(
                        self.peek(),
                        Tok::Plus | Tok::Minus | Tok::Star | Tok::Lt | Tok::Le | Tok::EqOp
                    ) || self.is_time_name(&name)
                    {
                        return self.comparison(Some(name));
                    }
                    self.nullary_atom(name)
                }
            },
            other => Err(self.err(format!("expected a formula, found {}", other.describe()))),
        }
    }

    fn is_time_name(&self, name: &str) -> bool {
        if self.sig.is_time_const(name) {
            return true;
        }
        if let Some(b) = self.binders.iter().rev().find(|b| b.name == *name) {
            return b.sort == Some(Sort::Time);
        }
        self.free_sorts.get(name) == Some(&Sort::Time)
    }

    fn nullary_atom(&mut self, name: String) -> Result<Formula, SyntaxError> {
        if let Some(sorts) = self.sig.predicates.get(&name) {
            if !sorts.is_empty() {
                return Err(SyntaxError::Arity {
                    symbol: name,
                    expected: sorts.len(),
                    got: 0,
                });
            }
            return Ok(Formula::atom(name, vec![]));
        }
        if self.sig.actions.contains_key(&name) {
            return Err(self.err_at_prev(format!("`{}` is an action symbol, not a predicate", name)));
        }
        if self.opts.auto_declare {
            self.sig.add_predicate(name.clone(), vec![])?;
            return Ok(Formula::atom(name, vec![]));
        }
        Err(SyntaxError::Undeclared(name))
    }

    fn applied_atom(&mut self, name: String) -> Result<Formula, SyntaxError> {
        if self.sig.actions.contains_key(&name) {
            return Err(self.err(format!("`{}` is an action symbol, not a predicate", name)));
        }
        let declared = self.sig.predicates.get(&name).cloned();
        if declared.is_none() && !self.opts.auto_declare {
            return Err(SyntaxError::Undeclared(name));
        }
        let (args, sorts) = self.term_args(&name, declared)?;
        if self.sig.predicates.get(&name).is_none() {
            self.sig.add_predicate(name.clone(), sorts)?;
        }
        Ok(Formula::atom(name, args))
    }

    /// Parses a parenthesized argument list. With a declared sort list
    /// every position is parsed at its expected sort; otherwise
    /// (auto-declare) each argument's sort is guessed from its first
    /// token and the guessed list is returned for declaration.
    fn term_args(
        &mut self,
        symbol: &str,
        declared: Option<Vec<Sort>>,
    ) -> Result<(Vec<Term>, Vec<Sort>), SyntaxError> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        let mut sorts = Vec::new();
        if !matches!(self.peek(), Tok::RParen) {
            loop {
                let expected = match &declared {
                    Some(list) => *list.get(args.len()).ok_or_else(|| SyntaxError::Arity {
                        symbol: symbol.to_string(),
                        expected: list.len(),
                        got: args.len() + 1,
                    })?,
                    None => self.guess_sort(),
                };
                args.push(self.term(expected)?);
                sorts.push(expected);
                if matches!(self.peek(), Tok::Comma) {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        if let Some(list) = declared {
            if args.len() != list.len() {
                return Err(SyntaxError::Arity {
                    symbol: symbol.to_string(),
                    expected: list.len(),
                    got: args.len(),
                });
            }
        }
        Ok((args, sorts))
    }

    fn guess_sort(&self) -> Sort {
        match self.peek() {
            Tok::Num(_) | Tok::Minus => Sort::Time,
            Tok::Ident(name) => {
                if self.is_time_name(name) {
                    Sort::Time
                } else if matches!(self.peek2(), Tok::Plus | Tok::Star | Tok::Minus | Tok::Slash) {
                    Sort::Time
                } else {
                    Sort::Object
                }
            }
            _ => Sort::Object,
        }
    }

    /// Resolves an identifier occurring at an expected sort. Binders
    /// shadow everything; then declared constants; then (allow_free)
    /// free variables; then (auto_declare) fresh constants.
    fn resolve_name(&mut self, name: String, expected: Sort) -> Result<Resolved, SyntaxError> {
        if let Some(b) = self.binders.iter_mut().rev().find(|b| b.name == name) {
            match b.sort {
                None => b.sort = Some(expected),
                Some(s) if s != expected => {
                    return Err(SyntaxError::Sort(format!(
                        "variable `{}` is used at both sorts {} and {}",
                        name, s, expected
                    )));
                }
                _ => {}
            }
            return Ok(Resolved::Variable(name));
        }
        match expected {
            Sort::Object => {
                if self.sig.is_object_const(&name) {
                    return Ok(Resolved::Constant(name));
                }
                if self.sig.is_time_const(&name) {
                    return Err(SyntaxError::Sort(format!(
                        "time constant `{}` used in an object position",
                        name
                    )));
                }
            }
            Sort::Time => {
                if self.sig.is_time_const(&name) {
                    return Ok(Resolved::Constant(name));
                }
                if self.sig.is_object_const(&name) {
                    return Err(SyntaxError::Sort(format!(
                        "object constant `{}` used in a time position",
                        name
                    )));
                }
            }
        }
        if self.sig.predicates.contains_key(&name) || self.sig.actions.contains_key(&name) {
            return Err(SyntaxError::Sort(format!("`{}` is not a term", name)));
        }
        if self.opts.allow_free {
            if let Some(prev) = self.free_sorts.get(&name) {
                if *prev != expected {
                    return Err(SyntaxError::Sort(format!(
                        "variable `{}` is used at both sorts {} and {}",
                        name, prev, expected
                    )));
                }
            } else {
                self.free_sorts.insert(name.clone(), expected);
            }
            return Ok(Resolved::Variable(name));
        }
        if self.opts.auto_declare {
            match expected {
                Sort::Object => self.sig.add_object_const(name.clone())?,
                Sort::Time => self.sig.add_time_const(name.clone())?,
            }
            return Ok(Resolved::Constant(name));
        }
        Err(SyntaxError::Undeclared(name))
    }

    fn term(&mut self, expected: Sort) -> Result<Term, SyntaxError> {
        match expected {
            Sort::Time => Ok(Term::Time(self.time_expr(None)?)),
            Sort::Object => {
                let name = self.ident("an object term")?;
                if matches!(self.peek(), Tok::LParen) {
                    let sorts = self
                        .sig
                        .functions
                        .get(&name)
                        .cloned()
                        .ok_or_else(|| SyntaxError::Undeclared(name.clone()))?;
                    let (args, _) = self.term_args(&name, Some(sorts))?;
                    return Ok(Term::App(name, args));
                }
                match self.resolve_name(name, Sort::Object)? {
                    Resolved::Variable(n) => Ok(Term::Var(n)),
                    Resolved::Constant(n) => Ok(Term::Const(n)),
                }
            }
        }
    }

    fn comparison(&mut self, first: Option<String>) -> Result<Formula, SyntaxError> {
        let lhs = self.time_expr(first)?;
        let op = self.cmp_op()?;
        let rhs = self.time_expr(None)?;
        Ok(Formula::Cmp(op, lhs, rhs))
    }

    fn cmp_op(&mut self) -> Result<CmpOp, SyntaxError> {
        match self.peek() {
            Tok::Lt => {
                self.bump();
                Ok(CmpOp::Lt)
            }
            Tok::Le => {
                self.bump();
                Ok(CmpOp::Le)
            }
            Tok::EqOp => {
                self.bump();
                Ok(CmpOp::Eq)
            }
            other => Err(self.err(format!(
                "expected a comparison (`<`, `<=`, `=`), found {}",
                other.describe()
            ))),
        }
    }

    /// Parses a linear time expression. `first` is an already-consumed
    /// leading identifier.
    fn time_expr(&mut self, first: Option<String>) -> Result<TimeExpr, SyntaxError> {
        let mut expr = match first {
            Some(name) => self.time_atom(name, Rat::from_integer(1))?,
            None => {
                let negate = if matches!(self.peek(), Tok::Minus) {
                    self.bump();
                    true
                } else {
                    false
                };
                let part = self.time_part()?;
                if negate {
                    part.scale(Rat::from_integer(-1))
                } else {
                    part
                }
            }
        };
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    let part = self.time_part()?;
                    expr = expr.add(&part);
                }
                Tok::Minus => {
                    self.bump();
                    let part = self.time_part()?;
                    expr = expr.sub(&part);
                }
                _ => break,
            }
        }
        Ok(expr)
    }

    fn time_part(&mut self) -> Result<TimeExpr, SyntaxError> {
        match self.peek().clone() {
            Tok::Num(_) => {
                let q = self.rational()?;
                if matches!(self.peek(), Tok::Star) {
                    self.bump();
                    let name = self.ident("a time constant or variable")?;
                    self.time_atom(name, q)
                } else {
                    Ok(TimeExpr::from_rat(q))
                }
            }
            Tok::Ident(name) => {
                self.bump();
                self.time_atom(name, Rat::from_integer(1))
            }
            other => Err(self.err(format!(
                "expected a time expression, found {}",
                other.describe()
            ))),
        }
    }

    fn time_atom(&mut self, name: String, coeff: Rat) -> Result<TimeExpr, SyntaxError> {
        let atom = match self.resolve_name(name, Sort::Time)? {
            Resolved::Variable(n) => TimeAtom::Var(n),
            Resolved::Constant(n) => TimeAtom::Const(n),
        };
        Ok(TimeExpr::atom_scaled(atom, coeff))
    }

    fn action_term(&mut self) -> Result<ActionTerm, SyntaxError> {
        let name = self.ident("an action symbol")?;
        let declared = self.sig.actions.get(&name).cloned();
        if declared.is_none() && !self.opts.auto_declare {
            return Err(SyntaxError::Undeclared(name));
        }
        let (args, sorts) = if matches!(self.peek(), Tok::LParen) {
            self.term_args(&name, declared.clone())?
        } else {
            if let Some(list) = &declared {
                if !list.is_empty() {
                    return Err(SyntaxError::Arity {
                        symbol: name,
                        expected: list.len(),
                        got: 0,
                    });
                }
            }
            (vec![], vec![])
        };
        if declared.is_none() {
            self.sig.add_action(name.clone(), sorts)?;
        }
        Ok(ActionTerm::new(name, args))
    }

    fn action_operator(&mut self, close: Tok) -> Result<ActionOp, SyntaxError> {
        let mut op = ActionOp::empty();
        if *self.peek() == close {
            self.bump();
            return Ok(op);
        }
        loop {
            op.actions.push(self.action_term()?);
            if matches!(self.peek(), Tok::Semi) {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(close)?;
        Ok(op)
    }
}

enum Resolved {
    Variable(String),
    Constant(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::render;

    fn suzy_sig() -> Signature {
        let mut sig = Signature::default();
        sig.add_object_const("suzy").unwrap();
        sig.add_object_const("billy").unwrap();
        sig.add_time_const("ds").unwrap();
        sig.add_time_const("db").unwrap();
        sig.add_time_const("t1").unwrap();
        sig.add_time_const("d1").unwrap();
        sig.add_predicate("BB", vec![Sort::Time]).unwrap();
        sig.add_predicate("H", vec![Sort::Time, Sort::Object]).unwrap();
        sig.add_action("T", vec![Sort::Time, Sort::Time, Sort::Object]).unwrap();
        sig
    }

    fn roundtrip(text: &str, sig: &mut Signature, opts: ParseOptions) -> Formula {
        let phi = parse_formula(text, sig, opts).unwrap();
        let printed = render(&phi);
        let again = parse_formula(&printed, sig, opts).unwrap();
        assert_eq!(phi, again, "parse(render(phi)) differs for `{}`", printed);
        phi
    }

    #[test]
    fn parses_modal_atom_with_action_term() {
        let mut sig = suzy_sig();
        let phi = parse_formula("[T(0,ds,suzy)] H(ds,suzy)", &mut sig, ParseOptions::strict())
            .unwrap();
        match &phi {
            Formula::Act(op, _) => {
                assert_eq!(op.actions.len(), 1);
                assert_eq!(op.actions[0].symbol, "T");
                assert_eq!(op.actions[0].args.len(), 3);
            }
            other => panic!("expected an action modality, got {:?}", other),
        }
        assert_eq!(render(&phi), "[T(0,ds,suzy)] H(ds,suzy)");
    }

    #[test]
    fn parses_persistence_law_shape() {
        let mut sig = suzy_sig();
        let phi = roundtrip(
            "box (BB(t) -> forall t' (t < t' -> BB(t')))",
            &mut sig,
            ParseOptions::free(),
        );
        match &phi {
            Formula::Box(inner) => match inner.as_ref() {
                Formula::Implies(_, rhs) => {
                    assert!(matches!(rhs.as_ref(), Formula::Forall(v, _) if v.sort == Sort::Time));
                }
                other => panic!("expected an implication, got {:?}", other),
            },
            other => panic!("expected box, got {:?}", other),
        }
        assert_eq!(phi.free_vars(), [Var::time("t")].into());
    }

    #[test]
    fn reports_offset_of_malformed_input() {
        let mut sig = Signature::default();
        let err = parse_formula("[a(x", &mut sig, ParseOptions::auto()).unwrap_err();
        match err {
            SyntaxError::Parse { offset, line, column, .. } => {
                assert_eq!((offset, line, column), (4, 1, 5));
            }
            other => panic!("expected a parse error, got {:?}", other),
        }
    }

    #[test]
    fn renders_action_law_without_stray_parens() {
        let mut sig = suzy_sig();
        let phi = roundtrip("~BB(t+d) -> [T(t,d,p)] H(t+d,p)", &mut sig, ParseOptions::free());
        assert_eq!(render(&phi), "~BB(t+d) -> [T(t,d,p)] H(t+d,p)");
        assert_eq!(
            phi.free_vars(),
            [Var::time("t"), Var::time("d"), Var::object("p")].into()
        );
    }

    #[test]
    fn printer_does_not_simplify() {
        let mut sig = Signature::default();
        sig.add_predicate("P", vec![]).unwrap();
        let phi = Formula::not(Formula::not(Formula::atom("P", vec![])));
        assert_eq!(render(&phi), "~~P");
        assert_eq!(render(&Formula::True), "true");
        let mut sig2 = sig.clone();
        roundtrip("~~P", &mut sig2, ParseOptions::strict());
    }

    #[test]
    fn diamond_and_sequence_operators_normalize() {
        let mut sig = Signature::default();
        let phi = parse_formula("<a> true", &mut sig, ParseOptions::auto()).unwrap();
        assert_eq!(render(&phi), "~[a] ~true");
        let psi = parse_formula("[a1;a2] P", &mut sig, ParseOptions::auto()).unwrap();
        match &psi {
            Formula::Act(op, _) => assert_eq!(op.actions.len(), 2),
            other => panic!("expected a sequence modality, got {:?}", other),
        }
        let empty = parse_formula("[] P", &mut sig, ParseOptions::auto()).unwrap();
        assert_eq!(render(&empty), "[] P");
        let dia = parse_formula("dia P", &mut sig, ParseOptions::auto()).unwrap();
        assert_eq!(render(&dia), "~box ~P");
    }

    #[test]
    fn precedence_matches_the_documented_table() {
        let mut sig = Signature::default();
        for (input, expect) in [
            ("P /\\ Q \\/ S", "P /\\ Q \\/ S"),
            ("P \\/ Q -> S", "P \\/ Q -> S"),
            ("P -> Q -> S", "P -> Q -> S"),
            ("(P -> Q) -> S", "(P -> Q) -> S"),
            ("~(P /\\ Q)", "~(P /\\ Q)"),
            ("box P -> [a] P", "box P -> [a] P"),
            ("[a] (P \\/ Q)", "[a] (P \\/ Q)"),
        ] {
            let phi = parse_formula(input, &mut sig, ParseOptions::auto()).unwrap();
            assert_eq!(render(&phi), expect, "for input `{}`", input);
        }
    }

    #[test]
    fn iff_desugars_to_two_implications() {
        let mut sig = Signature::default();
        let phi = parse_formula("P <-> Q", &mut sig, ParseOptions::auto()).unwrap();
        assert_eq!(render(&phi), "(P -> Q) /\\ (Q -> P)");
    }

    #[test]
    fn rejects_mixed_sort_use_of_one_name() {
        let mut sig = suzy_sig();
        let err = parse_formula(
            "BB(x) /\\ H(ds,x)",
            &mut sig,
            ParseOptions::free(),
        )
        .unwrap_err();
        assert!(matches!(err, SyntaxError::Sort(_)), "got {:?}", err);
    }

    #[test]
    fn rejects_undeclared_symbols_in_strict_mode() {
        let mut sig = suzy_sig();
        let err =
            parse_formula("Broken(ds)", &mut sig, ParseOptions::strict()).unwrap_err();
        assert_eq!(err, SyntaxError::Undeclared("Broken".into()));
        let err = parse_formula("BB(ds, ds)", &mut sig, ParseOptions::strict()).unwrap_err();
        assert!(matches!(err, SyntaxError::Arity { .. }), "got {:?}", err);
    }

    #[test]
    fn binder_sort_annotation_survives_roundtrip() {
        let mut sig = suzy_sig();
        let phi = roundtrip("forall x : object BB(ds)", &mut sig, ParseOptions::strict());
        assert!(matches!(&phi, Formula::Forall(v, _) if v.sort == Sort::Object));
        assert_eq!(render(&phi), "forall x : object BB(ds)");
        let err = parse_formula("forall x BB(ds)", &mut sig, ParseOptions::strict()).unwrap_err();
        assert_eq!(err, SyntaxError::CannotInfer("x".into()));
    }

    #[test]
    fn binder_shadowing_declared_constant_is_rejected() {
        let mut sig = suzy_sig();
        let err =
            parse_formula("forall t1 BB(t1)", &mut sig, ParseOptions::strict()).unwrap_err();
        assert!(matches!(err, SyntaxError::Parse { .. }), "got {:?}", err);
    }

    #[test]
    fn comparisons_parse_at_atom_level() {
        let mut sig = suzy_sig();
        let phi = roundtrip("ds + d1 < t1 + db", &mut sig, ParseOptions::strict());
        assert!(matches!(phi, Formula::Cmp(CmpOp::Lt, _, _)));
        let psi = roundtrip("BB(t1) /\\ t1 + db = ds", &mut sig, ParseOptions::strict());
        assert!(matches!(psi, Formula::And(..)));
        let scaled = roundtrip("2*t1 <= ds - 1/2", &mut sig, ParseOptions::strict());
        assert!(matches!(scaled, Formula::Cmp(CmpOp::Le, _, _)));
    }

    #[test]
    fn theory_file_roundtrips_to_stable_text() {
        let text = "\
# A tiny throw theory.
sort object
const suzy, billy : object
const ds, t1 : time
pred BB(time)
pred H(time, object)
action T(time, time, object)
fluent BB
law ~BB(t+d) -> [T(t,d,p)] H(t+d,p)
fact ~BB(0)
occurs T(0,ds,suzy)
constraint 0 < ds
bind ds = 1
case one {
  constraint ds < t1
  bind t1 = 2
  query [T(0,ds,suzy)] H(ds,suzy)
}
";
        let file = parse_theory(text).unwrap();
        assert_eq!(file.laws.len(), 1);
        assert_eq!(file.facts.len(), 1);
        assert_eq!(file.occurrences.len(), 1);
        assert_eq!(file.cases.len(), 1);
        assert_eq!(file.cases[0].queries.len(), 1);
        assert_eq!(file.bindings["ds"], Rat::from_integer(1));
        let once = file.render();
        let twice = parse_theory(&once).unwrap().render();
        assert_eq!(once, twice, "canonical render must be byte-stable");
    }

    #[test]
    fn theory_rejects_open_facts_and_model_lines() {
        let err = parse_theory("pred P(time)\nfact P(t)\n").unwrap_err();
        assert!(matches!(err, SyntaxError::Undeclared(_)), "got {:?}", err);
        let err = parse_theory("world w0\n").unwrap_err();
        assert!(matches!(err, SyntaxError::Parse { .. }), "got {:?}", err);
    }

    #[test]
    fn model_file_parses_worlds_edges_and_extensions() {
        let text = "\
const c1 : object
pred P(object)
action a(object)
world w0, w1
time w0 = 0
time w1 = 3
rel R: w0 -> w0
rel R: w0 -> w1
rel R: w1 -> w1
act a(c1): w0 -> {w1}
holds w1: P(c1)
";
        let (sig, model) = parse_model_file(text).unwrap();
        assert_eq!(model.world_count, 2);
        assert_eq!(model.domain, vec!["c1".to_string()]);
        assert_eq!(model.rel.len(), 3);
        assert_eq!(sig.actions["a"], vec![Sort::Object]);
        let table = &model.acts["a"];
        let targets = &table[&(World(0), vec![Value::Obj("c1".into())])];
        assert_eq!(targets.iter().copied().collect::<Vec<_>>(), vec![World(1)]);
        assert!(model.preds["P"].contains(&(World(1), vec![Value::Obj("c1".into())])));
    }

    #[test]
    fn model_file_rejects_unknown_worlds() {
        let text = "world w0\nrel R: w0 -> w9\n";
        let err = parse_model_file(text).unwrap_err();
        assert_eq!(err, SyntaxError::Undeclared("w9".into()));
    }
}
