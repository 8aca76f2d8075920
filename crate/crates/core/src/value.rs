use std::any::Any;
use std::fmt;
use std::sync::Arc;

use serde_json::Value as Json;

/// Opaque domain object produced by a [`TokenMapper`](crate::model::TokenMapper).
pub type MappedValue = Arc<dyn Any + Send + Sync>;

/// A typed argument extracted from a sentence.
#[derive(Clone)]
pub enum ArgValue {
    Integer(i64),
    Real(f64),
    /// Enumeration constant, by identifier (`"LEFT"`).
    Enum(String),
    Text(String),
    /// A mapped object together with the surface key that selected it.
    Object {
        key: String,
        value: MappedValue,
    },
    Collection(CollectionValue),
    /// Optional parameter with nothing bound.
    Absent,
}

/// Value of a collection-typed parameter.
///
/// Ranges are kept as their two bounds and only expanded while iterating.
#[derive(Clone, PartialEq)]
pub enum CollectionValue {
    List(Vec<ArgValue>),
    Range {
        low: i64,
        high: i64,
    },
    /// Every valid value of the element type; expanded when the handler runs.
    All,
}

impl CollectionValue {
    /// Iterate the elements. `All` yields nothing until it has been expanded
    /// by the engine at execution time.
    pub fn iter(&self) -> Box<dyn Iterator<Item = ArgValue> + '_> {
        match self {
            CollectionValue::List(values) => Box::new(values.iter().cloned()),
            CollectionValue::Range { low, high } => Box::new((*low..=*high).map(ArgValue::Integer)),
            CollectionValue::All => Box::new(std::iter::empty()),
        }
    }

    /// Number of elements, without expanding ranges.
    pub fn len(&self) -> u64 {
        match self {
            CollectionValue::List(values) => values.len() as u64,
            CollectionValue::Range { low, high } => high.abs_diff(*low) + 1,
            CollectionValue::All => 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl ArgValue {
    pub fn as_integer(&self) -> Option<i64> {
        match self {
            ArgValue::Integer(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            ArgValue::Real(x) => Some(*x),
            ArgValue::Integer(n) => Some(*n as f64),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            ArgValue::Enum(s) | ArgValue::Text(s) => Some(s),
            ArgValue::Object { key, .. } => Some(key),
            _ => None,
        }
    }

    pub fn as_collection(&self) -> Option<&CollectionValue> {
        match self {
            ArgValue::Collection(c) => Some(c),
            _ => None,
        }
    }

    /// Downcast a mapped object to its concrete type.
    pub fn object<T: Any>(&self) -> Option<&T> {
        match self {
            ArgValue::Object { value, .. } => value.downcast_ref::<T>(),
            _ => None,
        }
    }

    /// JSON form used by reports and golden corpora. Mapped objects are
    /// represented by their key; collections by their element list.
    pub fn to_json(&self) -> Json {
        match self {
            ArgValue::Integer(n) => Json::from(*n),
            ArgValue::Real(x) => serde_json::Number::from_f64(*x).map_or(Json::Null, Json::Number),
            ArgValue::Enum(s) | ArgValue::Text(s) => Json::from(s.as_str()),
            ArgValue::Object { key, .. } => Json::from(key.as_str()),
            ArgValue::Collection(CollectionValue::All) => Json::from("all"),
            ArgValue::Collection(c) => Json::Array(c.iter().map(|v| v.to_json()).collect()),
            ArgValue::Absent => Json::Null,
        }
    }
}

impl PartialEq for ArgValue {
    fn eq(&self, other: &Self) -> bool {
        use ArgValue::*;
        match (self, other) {
            (Integer(a), Integer(b)) => a == b,
            (Real(a), Real(b)) => a == b,
            (Enum(a), Enum(b)) | (Text(a), Text(b)) => a == b,
            (Object { key: a, value: va }, Object { key: b, value: vb }) => a == b && Arc::ptr_eq(va, vb),
            (Collection(a), Collection(b)) => a == b,
            (Absent, Absent) => true,
            _ => false,
        }
    }
}

impl fmt::Debug for ArgValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Debug for CollectionValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ArgValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArgValue::Integer(n) => write!(f, "{n}"),
            ArgValue::Real(x) => write!(f, "{x}"),
            ArgValue::Enum(s) => f.write_str(s),
            ArgValue::Text(s) => write!(f, "{s:?}"),
            ArgValue::Object { key, .. } => write!(f, "<{key}>"),
            ArgValue::Collection(c) => write!(f, "{c}"),
            ArgValue::Absent => f.write_str("null"),
        }
    }
}

impl fmt::Display for CollectionValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CollectionValue::List(values) => {
                f.write_str("[")?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
            CollectionValue::Range { low, high } => write!(f, "{low}..={high}"),
            CollectionValue::All => f.write_str("all"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_iterates_lazily_and_inclusively() {
        // Oracle: an explicit list of the same bounds.
        for low in 0..=50i64 {
            for high in low..=50 {
                let range = CollectionValue::Range { low, high };
                let expected: Vec<ArgValue> = (low..=high).map(ArgValue::Integer).collect();
                assert_eq!(range.len(), (high - low + 1) as u64);
                assert_eq!(range.iter().collect::<Vec<_>>(), expected);
                assert_eq!(
                    range.iter().collect::<Vec<_>>(),
                    CollectionValue::List(expected).iter().collect::<Vec<_>>()
                );
            }
        }
    }

    #[test]
    fn json_forms() {
        assert_eq!(ArgValue::Integer(3).to_json(), serde_json::json!(3));
        assert_eq!(ArgValue::Enum("LEFT".into()).to_json(), serde_json::json!("LEFT"));
        let list = ArgValue::Collection(CollectionValue::Range { low: 2, high: 4 });
        assert_eq!(list.to_json(), serde_json::json!([2, 3, 4]));
        let obj = ArgValue::Object {
            key: "green".into(),
            value: Arc::new((0u8, 255u8, 0u8)),
        };
        assert_eq!(obj.to_json(), serde_json::json!("green"));
        assert_eq!(obj.object::<(u8, u8, u8)>(), Some(&(0, 255, 0)));
    }
}
