//! Simultaneous substitutions over parameters, individual variables, and
//! rule pattern variables.

use std::collections::BTreeMap;
use std::fmt;

use crate::term::{is_numeral, ParamKind, Parameter, Sort, Term, TermError};

/// What a substitution can map.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SubstKey {
    Param(Parameter),
    Var(String),
    PatVar(String),
}

impl fmt::Display for SubstKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubstKey::Param(p) => write!(f, "{}", p),
            SubstKey::Var(v) => write!(f, "v:{}", v),
            SubstKey::PatVar(v) => write!(f, "?{}", v),
        }
    }
}

impl SubstKey {
    fn sort_hint(&self) -> Option<Sort> {
        match self {
            SubstKey::Param(_) => Some(Sort::Omega),
            SubstKey::Var(_) => Some(Sort::Iota),
            SubstKey::PatVar(_) => None,
        }
    }
}

/// A simultaneous, sort-preserving substitution. Application replaces every
/// mapped entity once; bindings are never chained.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Subst {
    map: BTreeMap<SubstKey, Term>,
}

impl Subst {
    pub fn new() -> Self {
        Subst::default()
    }

    pub fn singleton(key: SubstKey, term: Term) -> Result<Self, TermError> {
        let mut s = Subst::new();
        s.bind(key, term)?;
        Ok(s)
    }

    pub fn param(p: Parameter, term: Term) -> Result<Self, TermError> {
        Self::singleton(SubstKey::Param(p), term)
    }

    /// Adds a binding, rejecting range terms whose structural sort
    /// contradicts the key's sort.
    pub fn bind(&mut self, key: SubstKey, term: Term) -> Result<(), TermError> {
        if let (Some(ks), Some(ts)) = (key.sort_hint(), term.sort_hint()) {
            if ks != ts {
                return Err(TermError::SortError {
                    entity: key.to_string(),
                    term: term.to_string(),
                });
            }
        }
        self.map.insert(key, term);
        Ok(())
    }

    pub fn bind_unchecked(&mut self, key: SubstKey, term: Term) {
        self.map.insert(key, term);
    }

    pub fn get(&self, key: &SubstKey) -> Option<&Term> {
        self.map.get(key)
    }

    pub fn get_param(&self, p: &Parameter) -> Option<&Term> {
        self.map.get(&SubstKey::Param(p.clone()))
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SubstKey, &Term)> {
        self.map.iter()
    }

    pub fn remove(&mut self, key: &SubstKey) -> Option<Term> {
        self.map.remove(key)
    }

    /// Composition: applying the result equals applying `self` first and
    /// `other` second. Range terms of `self` get `other` applied to them.
    pub fn then(&self, other: &Subst) -> Subst {
        let mut map = BTreeMap::new();
        for (k, t) in &self.map {
            map.insert(k.clone(), other.apply_term(t));
        }
        for (k, t) in &other.map {
            map.entry(k.clone()).or_insert_with(|| t.clone());
        }
        Subst { map }
    }

    /// A ground numeric substitution maps passive parameters to `{0, s}`
    /// numerals; this is the shape evaluation expects.
    pub fn ground_numeric(pairs: Vec<(String, u64)>) -> Subst {
        let mut s = Subst::new();
        for (name, k) in pairs {
            s.bind_unchecked(
                SubstKey::Param(Parameter::passive(name)),
                crate::term::numeral(k),
            );
        }
        s
    }

    /// True when every key is a passive parameter and every range term is a
    /// pure numeral.
    pub fn is_ground_numeric(&self) -> bool {
        self.map.iter().all(|(k, t)| {
            matches!(k, SubstKey::Param(p) if p.kind == ParamKind::Passive) && is_numeral(t)
        })
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        match t {
            Term::Zero => Term::Zero,
            Term::Succ(inner) => Term::succ(self.apply_term(inner)),
            Term::Param(p) => match self.map.get(&SubstKey::Param(p.clone())) {
                Some(r) => r.clone(),
                None => t.clone(),
            },
            Term::Var(v) => match self.map.get(&SubstKey::Var(v.clone())) {
                Some(r) => r.clone(),
                None => t.clone(),
            },
            Term::App(name, args) => {
                Term::App(name.clone(), args.iter().map(|a| self.apply_term(a)).collect())
            }
            Term::PatVar(v) => match self.map.get(&SubstKey::PatVar(v.clone())) {
                Some(r) => r.clone(),
                None => t.clone(),
            },
        }
    }
}

impl FromIterator<(SubstKey, Term)> for Subst {
    fn from_iter<I: IntoIterator<Item = (SubstKey, Term)>>(iter: I) -> Self {
        Subst { map: iter.into_iter().collect() }
    }
}

impl fmt::Display for Subst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, t)) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{} <- {}", k, t)?;
        }
        write!(f, "}}")
    }
}
