//! Clause-based problem language.
//!
//! ```text
//! problem    := decl (';' decl)* [';']
//! decl       := ident+ '=' constraint (',' constraint)*
//! constraint := relname ident* ['=' number]
//! ```
//!
//! `#` starts a comment running to the end of the line. Relation names are
//! always at least four characters long, so they never collide with point
//! identifiers (`[a-z][a-z0-9]{0,2}`).

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Upper bound on the number of points in one problem.
pub const MAX_POINTS: usize = 16;

/// A point name, validated against `[a-z][a-z0-9]{0,2}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PointId(String);

impl PointId {
    pub fn new(name: impl Into<String>) -> Result<Self, InvalidPointId> {
        let name = name.into();
        if Self::is_valid(&name) {
            Ok(Self(name))
        } else {
            Err(InvalidPointId(name))
        }
    }

    pub fn is_valid(name: &str) -> bool {
        let bytes = name.as_bytes();
        !bytes.is_empty()
            && bytes.len() <= 3
            && bytes[0].is_ascii_lowercase()
            && bytes[1..]
                .iter()
                .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Upper-cased display form used in captions and labels.
    pub fn label(&self) -> String {
        self.0.to_ascii_uppercase()
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for PointId {
    type Error = InvalidPointId;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        PointId::new(s)
    }
}

impl From<PointId> for String {
    fn from(p: PointId) -> String {
        p.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid point identifier `{0}`")]
pub struct InvalidPointId(pub String);

/// Shorthand used heavily in tests and templates. Panics on invalid names.
pub fn pid(name: &str) -> PointId {
    PointId::new(name).expect("valid point id")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelationKind {
    Perpendicular,
    Collinear,
    Concyclic,
    Parallel,
    AngleMeasure,
    LengthMeasure,
    Midpoint,
    Foot,
    Circumcenter,
    EqLength,
    EqAngle,
    EqRatio,
    Segment,
    Triangle,
    Square,
    Rectangle,
    Parallelogram,
    Trapezoid,
    Pentagon,
    CircleThrough,
    Free,
}

impl RelationKind {
    pub const ALL: [RelationKind; 21] = [
        RelationKind::Perpendicular,
        RelationKind::Collinear,
        RelationKind::Concyclic,
        RelationKind::Parallel,
        RelationKind::AngleMeasure,
        RelationKind::LengthMeasure,
        RelationKind::Midpoint,
        RelationKind::Foot,
        RelationKind::Circumcenter,
        RelationKind::EqLength,
        RelationKind::EqAngle,
        RelationKind::EqRatio,
        RelationKind::Segment,
        RelationKind::Triangle,
        RelationKind::Square,
        RelationKind::Rectangle,
        RelationKind::Parallelogram,
        RelationKind::Trapezoid,
        RelationKind::Pentagon,
        RelationKind::CircleThrough,
        RelationKind::Free,
    ];

    /// Relations usable inside the sampling loop.
    pub const RELATIONS: [RelationKind; 12] = [
        RelationKind::Perpendicular,
        RelationKind::Collinear,
        RelationKind::Concyclic,
        RelationKind::Parallel,
        RelationKind::AngleMeasure,
        RelationKind::LengthMeasure,
        RelationKind::Midpoint,
        RelationKind::Foot,
        RelationKind::Circumcenter,
        RelationKind::EqLength,
        RelationKind::EqAngle,
        RelationKind::EqRatio,
    ];

    /// Foundational objects.
    pub const OBJECTS: [RelationKind; 8] = [
        RelationKind::Segment,
        RelationKind::Triangle,
        RelationKind::Square,
        RelationKind::Rectangle,
        RelationKind::Parallelogram,
        RelationKind::Trapezoid,
        RelationKind::Pentagon,
        RelationKind::CircleThrough,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RelationKind::Perpendicular => "perp",
            RelationKind::Collinear => "coll",
            RelationKind::Concyclic => "cyclic",
            RelationKind::Parallel => "para",
            RelationKind::AngleMeasure => "angle",
            RelationKind::LengthMeasure => "length",
            RelationKind::Midpoint => "midpoint",
            RelationKind::Foot => "foot",
            RelationKind::Circumcenter => "circumcenter",
            RelationKind::EqLength => "eqlength",
            RelationKind::EqAngle => "eqangle",
            RelationKind::EqRatio => "eqratio",
            RelationKind::Segment => "segment",
            RelationKind::Triangle => "triangle",
            RelationKind::Square => "square",
            RelationKind::Rectangle => "rectangle",
            RelationKind::Parallelogram => "parallelogram",
            RelationKind::Trapezoid => "trapezoid",
            RelationKind::Pentagon => "pentagon",
            RelationKind::CircleThrough => "circle",
            RelationKind::Free => "free",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            RelationKind::Perpendicular | RelationKind::Parallel => 4,
            RelationKind::Collinear => 3,
            RelationKind::Concyclic => 4,
            RelationKind::AngleMeasure => 3,
            RelationKind::LengthMeasure => 2,
            RelationKind::Midpoint => 3,
            RelationKind::Foot => 4,
            RelationKind::Circumcenter => 4,
            RelationKind::EqLength => 4,
            RelationKind::EqAngle => 6,
            RelationKind::EqRatio => 8,
            RelationKind::Segment => 2,
            RelationKind::Triangle => 3,
            RelationKind::Square
            | RelationKind::Rectangle
            | RelationKind::Parallelogram
            | RelationKind::Trapezoid => 4,
            RelationKind::Pentagon => 5,
            RelationKind::CircleThrough => 2,
            RelationKind::Free => 1,
        }
    }

    pub fn carries_value(self) -> bool {
        matches!(
            self,
            RelationKind::AngleMeasure | RelationKind::LengthMeasure
        )
    }

    pub fn is_object(self) -> bool {
        Self::OBJECTS.contains(&self) || self == RelationKind::Free
    }

    /// Perceivable directly from a drawing.
    pub fn is_visual(self) -> bool {
        matches!(
            self,
            RelationKind::Perpendicular
                | RelationKind::Collinear
                | RelationKind::Concyclic
                | RelationKind::Parallel
                | RelationKind::AngleMeasure
                | RelationKind::LengthMeasure
        )
    }

    /// Range check for the numeric payload of value-carrying relations.
    pub fn value_in_range(self, v: f64) -> bool {
        match self {
            RelationKind::AngleMeasure => (1.0..=179.0).contains(&v),
            RelationKind::LengthMeasure => v.is_finite() && v > 0.0,
            _ => false,
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub kind: RelationKind,
    pub args: Vec<PointId>,
    pub value: Option<f64>,
}

impl Constraint {
    pub fn new(kind: RelationKind, args: &[&str]) -> Self {
        Self {
            kind,
            args: args.iter().map(|a| pid(a)).collect(),
            value: None,
        }
    }

    pub fn with_value(kind: RelationKind, args: &[&str], value: f64) -> Self {
        Self {
            value: Some(value),
            ..Self::new(kind, args)
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.name())?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        if let Some(v) = self.value {
            write!(f, " = {}", format_number(v))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub new_points: Vec<PointId>,
    pub constraints: Vec<Constraint>,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.new_points {
            write!(f, "{p} ")?;
        }
        f.write_str("=")?;
        for (i, c) in self.constraints.iter().enumerate() {
            let sep = if i == 0 { " " } else { ", " };
            write!(f, "{sep}{c}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub clauses: Vec<Clause>,
}

impl Problem {
    pub fn points(&self) -> impl Iterator<Item = &PointId> {
        self.clauses.iter().flat_map(|c| c.new_points.iter())
    }

    pub fn num_points(&self) -> usize {
        self.clauses.iter().map(|c| c.new_points.len()).sum()
    }

    pub fn constraints(&self) -> impl Iterator<Item = &Constraint> {
        self.clauses.iter().flat_map(|c| c.constraints.iter())
    }

    /// Checks every structural invariant; used by both the parser and the
    /// sampler's debug assertions.
    pub fn validate(&self) -> Result<(), ParseError> {
        check_problem(self, &[])
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Shortest decimal form that round-trips: `60.0` -> `60`, `22.5` -> `22.5`.
pub fn format_number(v: f64) -> String {
    format!("{v}")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: expected {expected}")]
    Syntax { pos: usize, expected: &'static str },
    #[error("point `{name}` declared twice (byte {pos})")]
    DuplicatePoint { name: String, pos: usize },
    #[error("unknown relation `{name}` at byte {pos}")]
    UnknownRelation { name: String, pos: usize },
    #[error("relation `{relation}` takes {expected} points, got {found} (byte {pos})")]
    ArityMismatch {
        relation: RelationKind,
        expected: usize,
        found: usize,
        pos: usize,
    },
    #[error("point `{name}` used before declaration (byte {pos})")]
    ForwardReference { name: String, pos: usize },
    #[error("invalid value for `{relation}` at byte {pos}: {reason}")]
    InvalidValue {
        relation: RelationKind,
        pos: usize,
        reason: &'static str,
    },
    #[error("point `{name}` is declared but never constrained")]
    UnconstrainedPoint { name: String },
    #[error("problem declares {count} points, limit is {MAX_POINTS}")]
    TooManyPoints { count: usize },
    #[error("first declaration must construct a geometric object")]
    MissingFoundation,
}

pub fn serialize_problem(p: &Problem) -> String {
    p.to_string()
}

pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        cursor: 0,
        end: text.len(),
    };
    let (problem, spans) = parser.problem()?;
    check_problem(&problem, &spans)?;
    Ok(problem)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Number(f64),
    Eq,
    Comma,
    Semi,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'=' => {
                out.push((Tok::Eq, i));
                i += 1;
            }
            b',' => {
                out.push((Tok::Comma, i));
                i += 1;
            }
            b';' => {
                out.push((Tok::Semi, i));
                i += 1;
            }
            b'a'..=b'z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_lowercase()
                        || bytes[i].is_ascii_digit()
                        || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push((Tok::Word(text[start..i].to_string()), start));
            }
            b'0'..=b'9' | b'.' | b'-' | b'+' => {
                let start = i;
                i += 1;
                while i < bytes.len()
                    && (bytes[i].is_ascii_digit()
                        || matches!(bytes[i], b'.' | b'e' | b'E')
                        || (matches!(bytes[i], b'-' | b'+') && matches!(bytes[i - 1], b'e' | b'E')))
                {
                    i += 1;
                }
                let v: f64 = text[start..i].parse().map_err(|_| ParseError::Syntax {
                    pos: start,
                    expected: "number",
                })?;
                out.push((Tok::Number(v), start));
            }
            _ => {
                return Err(ParseError::Syntax {
                    pos: i,
                    expected: "identifier, relation, number, '=', ',' or ';'",
                })
            }
        }
    }
    Ok(out)
}

/// Byte offsets kept alongside the parsed structure for error reporting.
struct ClauseSpans {
    points: Vec<usize>,
    constraints: Vec<(usize, Vec<usize>)>,
}

struct Parser {
    tokens: Vec<(Tok, usize)>,
    cursor: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.cursor).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.tokens.get(self.cursor).map_or(self.end, |(_, p)| *p)
    }

    fn problem(&mut self) -> Result<(Problem, Vec<ClauseSpans>), ParseError> {
        let mut clauses = Vec::new();
        let mut spans = Vec::new();
        loop {
            let (c, s) = self.decl()?;
            clauses.push(c);
            spans.push(s);
            match self.peek() {
                None => break,
                Some(Tok::Semi) => {
                    self.cursor += 1;
                    if self.peek().is_none() {
                        break;
                    }
                }
                Some(_) => {
                    return Err(ParseError::Syntax {
                        pos: self.pos(),
                        expected: "',' or ';'",
                    })
                }
            }
        }
        Ok((Problem { clauses }, spans))
    }

    fn decl(&mut self) -> Result<(Clause, ClauseSpans), ParseError> {
        let mut new_points = Vec::new();
        let mut point_pos = Vec::new();
        while let Some(Tok::Word(w)) = self.peek() {
            let pos = self.pos();
            let id = PointId::new(w.clone()).map_err(|_| ParseError::Syntax {
                pos,
                expected: "point identifier [a-z][a-z0-9]{0,2}",
            })?;
            new_points.push(id);
            point_pos.push(pos);
            self.cursor += 1;
        }
        if new_points.is_empty() {
            return Err(ParseError::Syntax {
                pos: self.pos(),
                expected: "point identifier",
            });
        }
        if self.peek() != Some(&Tok::Eq) {
            return Err(ParseError::Syntax {
                pos: self.pos(),
                expected: "'='",
            });
        }
        self.cursor += 1;
        let mut constraints = Vec::new();
        let mut cspans = Vec::new();
        loop {
            let (c, s) = self.constraint()?;
            constraints.push(c);
            cspans.push(s);
            if self.peek() == Some(&Tok::Comma) {
                self.cursor += 1;
            } else {
                break;
            }
        }
        Ok((
            Clause {
                new_points,
                constraints,
            },
            ClauseSpans {
                points: point_pos,
                constraints: cspans,
            },
        ))
    }

    fn constraint(&mut self) -> Result<(Constraint, (usize, Vec<usize>)), ParseError> {
        let rel_pos = self.pos();
        let name = match self.peek() {
            Some(Tok::Word(w)) => w.clone(),
            _ => {
                return Err(ParseError::Syntax {
                    pos: rel_pos,
                    expected: "relation name",
                })
            }
        };
        let kind = RelationKind::from_name(&name).ok_or(ParseError::UnknownRelation {
            name: name.clone(),
            pos: rel_pos,
        })?;
        self.cursor += 1;
        let mut args = Vec::new();
        let mut arg_pos = Vec::new();
        while let Some(Tok::Word(w)) = self.peek() {
            let pos = self.pos();
            let id = PointId::new(w.clone()).map_err(|_| ParseError::Syntax {
                pos,
                expected: "point identifier [a-z][a-z0-9]{0,2}",
            })?;
            args.push(id);
            arg_pos.push(pos);
            self.cursor += 1;
        }
        if args.len() != kind.arity() {
            return Err(ParseError::ArityMismatch {
                relation: kind,
                expected: kind.arity(),
                found: args.len(),
                pos: rel_pos,
            });
        }
        let mut value = None;
        if self.peek() == Some(&Tok::Eq) {
            self.cursor += 1;
            let vpos = self.pos();
            match self.peek() {
                Some(Tok::Number(v)) => {
                    let v = *v;
                    self.cursor += 1;
                    if !kind.carries_value() {
                        return Err(ParseError::InvalidValue {
                            relation: kind,
                            pos: vpos,
                            reason: "relation takes no value",
                        });
                    }
                    if !kind.value_in_range(v) {
                        return Err(ParseError::InvalidValue {
                            relation: kind,
                            pos: vpos,
                            reason: "value out of range",
                        });
                    }
                    value = Some(v);
                }
                _ => {
                    return Err(ParseError::Syntax {
                        pos: vpos,
                        expected: "number",
                    })
                }
            }
        } else if kind.carries_value() {
            return Err(ParseError::InvalidValue {
                relation: kind,
                pos: self.pos(),
                reason: "missing '= value'",
            });
        }
        Ok((Constraint { kind, args, value }, (rel_pos, arg_pos)))
    }
}

fn check_problem(p: &Problem, spans: &[ClauseSpans]) -> Result<(), ParseError> {
    let mut declared: HashSet<&PointId> = HashSet::new();
    let mut count = 0usize;
    for (ci, clause) in p.clauses.iter().enumerate() {
        let span = spans.get(ci);
        for (pi, pt) in clause.new_points.iter().enumerate() {
            if !declared.insert(pt) {
                return Err(ParseError::DuplicatePoint {
                    name: pt.to_string(),
                    pos: span.map_or(0, |s| s.points[pi]),
                });
            }
            count += 1;
        }
        for (ki, c) in clause.constraints.iter().enumerate() {
            let cspan = span.map(|s| &s.constraints[ki]);
            if c.args.len() != c.kind.arity() {
                return Err(ParseError::ArityMismatch {
                    relation: c.kind,
                    expected: c.kind.arity(),
                    found: c.args.len(),
                    pos: cspan.map_or(0, |s| s.0),
                });
            }
            match (c.kind.carries_value(), c.value) {
                (true, Some(v)) if !c.kind.value_in_range(v) => {
                    return Err(ParseError::InvalidValue {
                        relation: c.kind,
                        pos: cspan.map_or(0, |s| s.0),
                        reason: "value out of range",
                    })
                }
                (true, None) => {
                    return Err(ParseError::InvalidValue {
                        relation: c.kind,
                        pos: cspan.map_or(0, |s| s.0),
                        reason: "missing '= value'",
                    })
                }
                (false, Some(_)) => {
                    return Err(ParseError::InvalidValue {
                        relation: c.kind,
                        pos: cspan.map_or(0, |s| s.0),
                        reason: "relation takes no value",
                    })
                }
                _ => {}
            }
            for (ai, a) in c.args.iter().enumerate() {
                if !declared.contains(a) {
                    return Err(ParseError::ForwardReference {
                        name: a.to_string(),
                        pos: cspan.map_or(0, |s| s.1[ai]),
                    });
                }
            }
        }
        for pt in &clause.new_points {
            if !clause.constraints.iter().any(|c| c.args.contains(pt)) {
                return Err(ParseError::UnconstrainedPoint {
                    name: pt.to_string(),
                });
            }
        }
    }
    if count > MAX_POINTS {
        return Err(ParseError::TooManyPoints { count });
    }
    match p.clauses.first() {
        Some(first)
            if first
                .constraints
                .iter()
                .any(|c| c.kind.is_object() && c.kind != RelationKind::Free) =>
        {
            Ok(())
        }
        _ => Err(ParseError::MissingFoundation),
    }
}
