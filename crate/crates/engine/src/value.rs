//! Runtime values, their kinds and the arithmetic rules shared by every
//! construct: `INF` is the maximum of its type, it absorbs `+` and `-`, and
//! integer results saturate at the range of their type.

use std::fmt;

use graphdyn_core::{NodeId, Weight};
use graphdyn_dsl::Type;

/// Concrete type of a scalar slot or property element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Int,
    Long,
    Float,
    Double,
    Bool,
    Node,
    Edge,
}

impl Kind {
    pub fn from_type(t: &Type) -> Option<Kind> {
        Some(match t {
            Type::Int => Kind::Int,
            Type::Long => Kind::Long,
            Type::Float => Kind::Float,
            Type::Double => Kind::Double,
            Type::Bool => Kind::Bool,
            Type::Node => Kind::Node,
            Type::Edge => Kind::Edge,
            _ => return None,
        })
    }

    pub fn is_floating(self) -> bool {
        matches!(self, Kind::Float | Kind::Double)
    }

    pub fn is_integral(self) -> bool {
        matches!(self, Kind::Int | Kind::Long | Kind::Node)
    }

    pub fn is_numeric(self) -> bool {
        self.is_floating() || self.is_integral()
    }

    fn int_range(self) -> (i64, i64) {
        match self {
            Kind::Long => (i64::MIN, i64::MAX),
            _ => (i32::MIN as i64, i32::MAX as i64),
        }
    }

    /// The `INF` value of this kind.
    pub fn inf(self) -> Value {
        match self {
            Kind::Long => Value::Int(i64::MAX),
            Kind::Int | Kind::Node => Value::Int(i32::MAX as i64),
            Kind::Float => Value::Float(f32::MAX as f64),
            Kind::Double => Value::Float(f64::MAX),
            Kind::Bool => Value::Bool(true),
            Kind::Edge => Value::Edge(EdgeVal::missing(0, 0)),
        }
    }

    pub fn is_inf(self, v: Value) -> bool {
        self.is_numeric() && v == self.inf()
    }

    pub fn zero(self) -> Value {
        match self {
            Kind::Int | Kind::Long | Kind::Node => Value::Int(0),
            Kind::Float | Kind::Double => Value::Float(0.0),
            Kind::Bool => Value::Bool(false),
            Kind::Edge => Value::Edge(EdgeVal::missing(0, 0)),
        }
    }

    fn clamp(self, x: i128) -> Value {
        let (lo, hi) = self.int_range();
        Value::Int(x.clamp(lo as i128, hi as i128) as i64)
    }

    fn round(self, x: f64) -> Value {
        match self {
            Kind::Float => Value::Float(x as f32 as f64),
            _ => Value::Float(x),
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Int => "int",
            Kind::Long => "long",
            Kind::Float => "float",
            Kind::Double => "double",
            Kind::Bool => "bool",
            Kind::Node => "node",
            Kind::Edge => "edge",
        })
    }
}

/// An edge as seen by a program. `slot` is the flat forward slot when known.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeVal {
    pub source: NodeId,
    pub destination: NodeId,
    pub weight: Weight,
    pub slot: usize,
}

impl EdgeVal {
    /// Slot must be looked up by endpoints before use.
    pub const LOOKUP: usize = usize::MAX - 1;
    /// `get_edge` found no such edge.
    pub const MISSING: usize = usize::MAX;

    pub fn missing(source: NodeId, destination: NodeId) -> Self {
        EdgeVal {
            source,
            destination,
            weight: 0,
            slot: Self::MISSING,
        }
    }

    pub fn exists(&self) -> bool {
        self.slot != Self::MISSING
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Edge(EdgeVal),
    Unit,
}

impl Value {
    pub fn as_i64(self) -> i64 {
        match self {
            Value::Int(v) => v,
            Value::Float(v) => v as i64,
            Value::Bool(b) => b as i64,
            _ => 0,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Value::Int(v) => v as f64,
            Value::Float(v) => v,
            Value::Bool(b) => b as i64 as f64,
            _ => 0.0,
        }
    }

    pub fn as_bool(self) -> bool {
        match self {
            Value::Bool(b) => b,
            Value::Int(v) => v != 0,
            _ => false,
        }
    }

    pub fn as_edge(self) -> Option<EdgeVal> {
        match self {
            Value::Edge(e) => Some(e),
            _ => None,
        }
    }

    /// Encoding used by atomic cells. Edges are never stored this way.
    pub fn to_bits(self) -> u64 {
        match self {
            Value::Int(v) => v as u64,
            Value::Float(v) => v.to_bits(),
            Value::Bool(b) => b as u64,
            Value::Edge(_) | Value::Unit => 0,
        }
    }

    pub fn from_bits(kind: Kind, bits: u64) -> Value {
        match kind {
            Kind::Float | Kind::Double => Value::Float(f64::from_bits(bits)),
            Kind::Bool => Value::Bool(bits != 0),
            _ => Value::Int(bits as i64),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) => write!(f, "{v}"),
            Value::Bool(true) => f.write_str("True"),
            Value::Bool(false) => f.write_str("False"),
            Value::Edge(e) => write!(f, "{}->{}", e.source, e.destination),
            Value::Unit => f.write_str("()"),
        }
    }
}

/// Converts `v` of kind `from` to kind `to`. `INF` stays `INF`.
pub fn convert(v: Value, from: Kind, to: Kind) -> Value {
    if from == to {
        return v;
    }
    if from.is_inf(v) && to.is_numeric() {
        return to.inf();
    }
    match (v, to) {
        (Value::Int(x), k) if k.is_integral() => k.clamp(x as i128),
        (Value::Int(x), k) if k.is_floating() => k.round(x as f64),
        (Value::Float(x), k) if k.is_integral() => {
            if x.is_nan() {
                Value::Int(0)
            } else {
                k.clamp(x as i128)
            }
        }
        (Value::Float(x), k) if k.is_floating() => k.round(x),
        (v, _) => v,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArithError(pub &'static str);

/// `a op b` with both operands already of `kind`.
pub fn arith(op: ArithOp, kind: Kind, a: Value, b: Value) -> Result<Value, ArithError> {
    if matches!(op, ArithOp::Add | ArithOp::Sub) && (kind.is_inf(a) || kind.is_inf(b)) {
        return Ok(kind.inf());
    }
    if kind.is_floating() {
        let (x, y) = (a.as_f64(), b.as_f64());
        let r = match op {
            ArithOp::Add => x + y,
            ArithOp::Sub => x - y,
            ArithOp::Mul => x * y,
            ArithOp::Div => {
                if y == 0.0 {
                    return Err(ArithError("division by zero"));
                }
                x / y
            }
            ArithOp::Rem => {
                if y == 0.0 {
                    return Err(ArithError("remainder by zero"));
                }
                x % y
            }
        };
        return Ok(kind.round(r));
    }
    let (x, y) = (a.as_i64() as i128, b.as_i64() as i128);
    let r = match op {
        ArithOp::Add => x + y,
        ArithOp::Sub => x - y,
        ArithOp::Mul => x.saturating_mul(y),
        ArithOp::Div => {
            if y == 0 {
                return Err(ArithError("division by zero"));
            }
            x / y
        }
        ArithOp::Rem => {
            if y == 0 {
                return Err(ArithError("remainder by zero"));
            }
            x % y
        }
    };
    Ok(kind.clamp(r))
}

pub fn negate(kind: Kind, a: Value) -> Value {
    match a {
        Value::Float(x) => Value::Float(-x),
        Value::Int(x) => kind.clamp(-(x as i128)),
        v => v,
    }
}

pub fn abs(kind: Kind, a: Value) -> Value {
    match a {
        Value::Float(x) => Value::Float(x.abs()),
        Value::Int(x) => kind.clamp((x as i128).abs()),
        v => v,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

/// Compares two values of the same kind. Any comparison with NaN is false
/// except `!=`.
pub fn compare(op: CmpOp, a: Value, b: Value) -> bool {
    use std::cmp::Ordering::*;
    let ord = match (a, b) {
        (Value::Int(x), Value::Int(y)) => Some(x.cmp(&y)),
        (Value::Float(x), Value::Float(y)) => x.partial_cmp(&y),
        (Value::Bool(x), Value::Bool(y)) => Some(x.cmp(&y)),
        (Value::Edge(x), Value::Edge(y)) => Some(
            (x.source, x.destination).cmp(&(y.source, y.destination)),
        ),
        _ => None,
    };
    match (op, ord) {
        (CmpOp::Ne, None) => true,
        (_, None) => false,
        (CmpOp::Lt, Some(o)) => o == Less,
        (CmpOp::Le, Some(o)) => o != Greater,
        (CmpOp::Gt, Some(o)) => o == Greater,
        (CmpOp::Ge, Some(o)) => o != Less,
        (CmpOp::Eq, Some(o)) => o == Equal,
        (CmpOp::Ne, Some(o)) => o != Equal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inf_absorbs_addition() {
        let inf = Kind::Int.inf();
        assert_eq!(arith(ArithOp::Add, Kind::Int, inf, Value::Int(5)), Ok(inf));
        assert_eq!(arith(ArithOp::Sub, Kind::Int, inf, Value::Int(5)), Ok(inf));
        let near = Value::Int(i32::MAX as i64 - 1);
        assert_eq!(arith(ArithOp::Add, Kind::Int, near, Value::Int(10)), Ok(inf));
        assert_eq!(
            arith(ArithOp::Add, Kind::Long, Kind::Long.inf(), Value::Int(1)),
            Ok(Kind::Long.inf())
        );
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert!(arith(ArithOp::Div, Kind::Int, Value::Int(1), Value::Int(0)).is_err());
        assert!(arith(ArithOp::Div, Kind::Double, Value::Float(1.0), Value::Float(0.0)).is_err());
    }

    #[test]
    fn conversions_keep_inf_and_saturate() {
        assert_eq!(convert(Kind::Int.inf(), Kind::Int, Kind::Long), Kind::Long.inf());
        assert_eq!(convert(Value::Int(1 << 40), Kind::Long, Kind::Int), Kind::Int.inf());
        assert_eq!(convert(Value::Int(3), Kind::Int, Kind::Double), Value::Float(3.0));
        assert_eq!(convert(Value::Float(2.9), Kind::Double, Kind::Int), Value::Int(2));
        assert_eq!(
            convert(Value::Float(0.1), Kind::Double, Kind::Float),
            Value::Float(0.1f32 as f64)
        );
    }

    #[test]
    fn bits_round_trip() {
        for (k, v) in [
            (Kind::Int, Value::Int(-7)),
            (Kind::Long, Value::Int(i64::MIN)),
            (Kind::Double, Value::Float(-0.25)),
            (Kind::Bool, Value::Bool(true)),
        ] {
            assert_eq!(Value::from_bits(k, v.to_bits()), v);
        }
    }

    #[test]
    fn nan_compares_false() {
        let nan = Value::Float(f64::NAN);
        assert!(!compare(CmpOp::Lt, nan, Value::Float(1.0)));
        assert!(compare(CmpOp::Ne, nan, nan));
    }
}
