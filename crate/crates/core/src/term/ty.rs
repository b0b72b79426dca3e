use std::fmt;
use std::sync::Arc;

/// A type symbol. The four builtins always exist; everything else is
/// declared by the user and carries no algebraic structure of its own.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ty {
    Nat,
    Int,
    Rat,
    Prop,
    User(Arc<str>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TyKind {
    BuiltinNat,
    BuiltinInt,
    BuiltinRat,
    BuiltinProp,
    UserDeclared,
}

impl Ty {
    pub fn user(name: &str) -> Ty {
        Ty::User(Arc::from(name))
    }

    /// Resolves a builtin type name. User names are not known here.
    pub fn builtin(name: &str) -> Option<Ty> {
        match name {
            "nat" => Some(Ty::Nat),
            "int" => Some(Ty::Int),
            "rat" => Some(Ty::Rat),
            "prop" => Some(Ty::Prop),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Ty::Nat => "nat",
            Ty::Int => "int",
            Ty::Rat => "rat",
            Ty::Prop => "prop",
            Ty::User(name) => name,
        }
    }

    pub fn kind(&self) -> TyKind {
        match self {
            Ty::Nat => TyKind::BuiltinNat,
            Ty::Int => TyKind::BuiltinInt,
            Ty::Rat => TyKind::BuiltinRat,
            Ty::Prop => TyKind::BuiltinProp,
            Ty::User(_) => TyKind::UserDeclared,
        }
    }

    pub fn is_prop(&self) -> bool {
        matches!(self, Ty::Prop)
    }

    pub fn is_user(&self) -> bool {
        matches!(self, Ty::User(_))
    }

    /// nat, int and rat: the types the semantic oracle can evaluate.
    pub fn is_concrete_value(&self) -> bool {
        matches!(self, Ty::Nat | Ty::Int | Ty::Rat)
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
