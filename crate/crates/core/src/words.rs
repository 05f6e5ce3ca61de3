//! Lazily evaluated configurations: periodic, Toeplitz, mirror, amplified,
//! product and shifted words.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::groups::{Ball, ExtensionRule, FiniteGroup, GroupDescriptor, GroupElement, GroupKind};

/// Index of a symbol in its word's [`Alphabet`].
pub type Symbol = u8;

/// Largest window scanned when validating Toeplitz completeness.
pub const TOEPLITZ_CHECK_CAP: i64 = 1 << 22;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new(symbols: Vec<String>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::Word("alphabet must be nonempty".into()));
        }
        if symbols.len() > 255 {
            return Err(Error::Word("alphabet has more than 255 symbols".into()));
        }
        let distinct: BTreeSet<&String> = symbols.iter().collect();
        if distinct.len() != symbols.len() {
            return Err(Error::Word("alphabet has duplicate symbols".into()));
        }
        Ok(Alphabet { symbols })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn name(&self, s: Symbol) -> &str {
        &self.symbols[s as usize]
    }

    pub fn index_of(&self, name: &str) -> Option<Symbol> {
        self.symbols.iter().position(|x| x == name).map(|i| i as Symbol)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ToeplitzStage {
    pub period: i64,
    pub residue: i64,
    pub symbol: Symbol,
}

/// The shape of a word; leaves are ℤ-words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WordGenerator {
    Periodic { cycle: Vec<Symbol> },
    Toeplitz { stages: Vec<ToeplitzStage> },
    /// Listed symbols from `start` on, `fill` everywhere else.
    Explicit { start: i64, symbols: Vec<Symbol>, fill: Symbol },
    Mirror(Box<WordGenerator>),
    Amplified(Box<WordGenerator>),
    /// `x₀(g, s) = a_s` where the inner word reads `1`, else `0`.
    Product { inner: Box<WordGenerator>, order: u32 },
    Shifted { by: GroupElement, inner: Box<WordGenerator> },
}

/// A configuration in `A^Γ` with its alphabet and group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Word {
    pub generator: WordGenerator,
    pub alphabet: Alphabet,
    pub group: GroupDescriptor,
}

fn symbols_from(tokens: &[String]) -> (Alphabet, BTreeMap<String, Symbol>) {
    let mut names = Vec::new();
    let mut map = BTreeMap::new();
    for t in tokens {
        if !map.contains_key(t) {
            map.insert(t.clone(), names.len() as Symbol);
            names.push(t.clone());
        }
    }
    (Alphabet::new(names).expect("nonempty distinct"), map)
}

fn chars(s: &str) -> Vec<String> {
    s.chars().map(String::from).collect()
}

impl Word {
    /// Periodic ℤ-word repeating `cycle` (one symbol per character).
    pub fn periodic(cycle: &str) -> Result<Self> {
        Self::periodic_tokens(&chars(cycle))
    }

    pub fn periodic_tokens(cycle: &[String]) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::Word("periodic cycle must be nonempty".into()));
        }
        let (alphabet, map) = symbols_from(cycle);
        Ok(Word {
            generator: WordGenerator::Periodic {
                cycle: cycle.iter().map(|c| map[c]).collect(),
            },
            alphabet,
            group: GroupDescriptor::integers(),
        })
    }

    /// ℤ-word equal to `symbols` on `[start, start + len)` and `fill`
    /// elsewhere.
    pub fn explicit(start: i64, symbols: &str, fill: &str) -> Result<Self> {
        let mut tokens = vec![fill.to_string()];
        tokens.extend(chars(symbols));
        let (alphabet, map) = symbols_from(&tokens);
        Ok(Word {
            generator: WordGenerator::Explicit {
                start,
                symbols: chars(symbols).iter().map(|c| map[c]).collect(),
                fill: map[fill],
            },
            alphabet,
            group: GroupDescriptor::integers(),
        })
    }

    /// Toeplitz word from `(period, residue, symbol)` stages; the earliest
    /// matching stage wins. Periods must divide their successors and the
    /// stages must assign every integer.
    pub fn toeplitz(stages: &[(i64, i64, &str)]) -> Result<Self> {
        let tokens: Vec<String> = stages.iter().map(|s| s.2.to_string()).collect();
        if tokens.is_empty() {
            return Err(Error::Word("Toeplitz word needs at least one stage".into()));
        }
        let (alphabet, map) = symbols_from(&tokens);
        let mut out = Vec::with_capacity(stages.len());
        for (i, &(p, r, s)) in stages.iter().enumerate() {
            if p <= 0 {
                return Err(Error::Word(format!("stage {i}: period must be positive")));
            }
            if i > 0 && p % stages[i - 1].0 != 0 {
                return Err(Error::Word(format!(
                    "stage {i}: period {p} is not a multiple of {}",
                    stages[i - 1].0
                )));
            }
            out.push(ToeplitzStage {
                period: p,
                residue: r.rem_euclid(p),
                symbol: map[s],
            });
        }
        check_toeplitz_complete(&out)?;
        Ok(Word {
            generator: WordGenerator::Toeplitz { stages: out },
            alphabet,
            group: GroupDescriptor::integers(),
        })
    }

    /// Period-doubling Toeplitz word: stage `k` (1-based) has period `2^k`,
    /// residue `2^{k-1} − 1` and symbol alternating `0, 1, 0, ...`; a
    /// closing stage of period `2^levels` fills the remaining residue `−1`.
    pub fn period_doubling(levels: u32) -> Result<Self> {
        if !(1..=40).contains(&levels) {
            return Err(Error::Word("period-doubling levels must be in 1..=40".into()));
        }
        let sym = |k: u32| if k % 2 == 1 { "0" } else { "1" };
        let mut stages: Vec<(i64, i64, &str)> = (1..=levels)
            .map(|k| (1i64 << k, (1i64 << (k - 1)) - 1, sym(k)))
            .collect();
        stages.push((1i64 << levels, (1i64 << levels) - 1, sym(levels + 1)));
        Self::toeplitz(&stages)
    }

    /// The mirror word `w̄(n) = w(−n)`.
    pub fn mirror(&self) -> Result<Self> {
        self.require_integers("mirror")?;
        Ok(Word {
            generator: match &self.generator {
                WordGenerator::Mirror(inner) => (**inner).clone(),
                g => WordGenerator::Mirror(Box::new(g.clone())),
            },
            alphabet: self.alphabet.clone(),
            group: GroupDescriptor::integers(),
        })
    }

    /// The amplified D∞-word: `ŵ(s^n) = w(n)`, `ŵ(s^n t) = w(−n)`.
    pub fn amplify(&self) -> Result<Self> {
        self.require_integers("amplify")?;
        Ok(Word {
            generator: WordGenerator::Amplified(Box::new(self.generator.clone())),
            alphabet: self.alphabet.clone(),
            group: GroupDescriptor::dihedral(),
        })
    }

    /// The product word over `G × F` (G = ℤ or D∞) on the alphabet
    /// `{0} ∪ {a_s : s ∈ F}`.
    pub fn product(&self, f: &FiniteGroup) -> Result<Self> {
        if !matches!(self.group.kind, GroupKind::Integers | GroupKind::Dihedral) {
            return Err(Error::Word("product words need an inner word over ℤ or D∞".into()));
        }
        if self.alphabet.symbols().iter().any(|s| s != "0" && s != "1") {
            return Err(Error::Word(format!(
                "product words need a binary inner word over {{0, 1}}, got {:?}",
                self.alphabet.symbols()
            )));
        }
        // Relabel so that the inner symbol index of "1" is known.
        let inner = relabel_binary(self);
        let mut names = vec!["0".to_string()];
        names.extend((0..f.order()).map(|s| format!("a_{s}")));
        let group = GroupDescriptor::product(self.group.kind.clone(), GroupKind::Finite(f.clone()))
            .with_extension(ExtensionRule::ProductLeft)?;
        Ok(Word {
            generator: WordGenerator::Product {
                inner: Box::new(inner),
                order: f.order() as u32,
            },
            alphabet: Alphabet::new(names)?,
            group,
        })
    }

    /// The left translate `g·w`, `(g·w)(h) = w(g⁻¹h)`.
    pub fn shift(&self, g: &GroupElement) -> Result<Self> {
        self.group.kind.check(g)?;
        let generator = match &self.generator {
            WordGenerator::Shifted { by, inner } => {
                let by = self.group.mul_u(g, by);
                if by == self.group.identity() {
                    (**inner).clone()
                } else {
                    WordGenerator::Shifted {
                        by,
                        inner: inner.clone(),
                    }
                }
            }
            other if *g == self.group.identity() => other.clone(),
            other => WordGenerator::Shifted {
                by: g.clone(),
                inner: Box::new(other.clone()),
            },
        };
        Ok(Word {
            generator,
            alphabet: self.alphabet.clone(),
            group: self.group.clone(),
        })
    }

    fn require_integers(&self, op: &str) -> Result<()> {
        if self.group.kind != GroupKind::Integers {
            return Err(Error::Word(format!("{op} needs a ℤ-word, got {}", self.group.kind.name())));
        }
        Ok(())
    }

    /// Symbol at `g`.
    pub fn eval(&self, g: &GroupElement) -> Result<Symbol> {
        self.group.kind.check(g)?;
        Ok(self.eval_u(g))
    }

    /// Symbol at `g` without checking group membership.
    pub fn eval_u(&self, g: &GroupElement) -> Symbol {
        eval_gen(&self.generator, &self.group.kind, g)
    }

    /// Evaluation at an integer of a ℤ-word.
    pub fn at(&self, n: i64) -> Symbol {
        eval_int(&self.generator, n)
    }

    pub fn symbol_name(&self, s: Symbol) -> &str {
        self.alphabet.name(s)
    }

    /// Patterns `h ↦ w(g·h)` on ball(radius) for every `g` in `window`,
    /// deduplicated and sorted.
    pub fn factor_language(&self, radius: usize, window: &[GroupElement]) -> Result<Vec<CylinderPattern>> {
        let dom = self.group.ball(radius)?;
        let mut seen: BTreeSet<Vec<Symbol>> = BTreeSet::new();
        for g in window {
            self.group.kind.check(g)?;
            seen.insert(
                dom.elements()
                    .iter()
                    .map(|d| self.eval_u(&self.group.mul_u(g, d)))
                    .collect(),
            );
        }
        Ok(seen
            .into_iter()
            .map(|s| CylinderPattern {
                domain: dom.elements().to_vec(),
                symbols: s,
            })
            .collect())
    }

    pub fn to_json(&self) -> Value {
        gen_to_json(&self.generator, &self.alphabet, &self.group)
    }

    /// Loads a word spec, e.g. `{"kind":"toeplitz","stages":[[2,0,"0"],...]}`.
    pub fn from_json(v: &Value, pointer: &str) -> Result<Self> {
        let kind = v
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::config(format!("{pointer}/kind"), "missing word kind"))?;
        let inner = || -> Result<Word> {
            let i = v
                .get("inner")
                .ok_or_else(|| Error::config(format!("{pointer}/inner"), "missing inner word"))?;
            Word::from_json(i, &format!("{pointer}/inner"))
        };
        let at = |field: &str, e: Error| Error::config(format!("{pointer}/{field}"), e.to_string());
        match kind {
            "periodic" => {
                let cycle = v.get("cycle").ok_or_else(|| Error::config(format!("{pointer}/cycle"), "missing"))?;
                let tokens = tokens_of(cycle).ok_or_else(|| Error::config(format!("{pointer}/cycle"), "expected string or array of strings"))?;
                Word::periodic_tokens(&tokens).map_err(|e| at("cycle", e))
            }
            "toeplitz" => {
                let stages = v
                    .get("stages")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::config(format!("{pointer}/stages"), "expected array"))?;
                let mut parsed: Vec<(i64, i64, String)> = Vec::new();
                for (i, st) in stages.iter().enumerate() {
                    let triple = st
                        .as_array()
                        .filter(|a| a.len() == 3)
                        .and_then(|a| Some((a[0].as_i64()?, a[1].as_i64()?, a[2].as_str()?.to_string())))
                        .ok_or_else(|| Error::config(format!("{pointer}/stages/{i}"), "expected [period, residue, symbol]"))?;
                    parsed.push(triple);
                }
                let refs: Vec<(i64, i64, &str)> = parsed.iter().map(|(p, r, s)| (*p, *r, s.as_str())).collect();
                Word::toeplitz(&refs).map_err(|e| at("stages", e))
            }
            "period-doubling" => {
                let levels = v
                    .get("levels")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| Error::config(format!("{pointer}/levels"), "expected positive integer"))?;
                Word::period_doubling(levels as u32).map_err(|e| at("levels", e))
            }
            "explicit" => {
                let start = v.get("start").and_then(Value::as_i64).unwrap_or(0);
                let symbols = v.get("symbols").and_then(Value::as_str).ok_or_else(|| Error::config(format!("{pointer}/symbols"), "expected string"))?;
                let fill = v.get("fill").and_then(Value::as_str).unwrap_or("0");
                Word::explicit(start, symbols, fill).map_err(|e| at("symbols", e))
            }
            "mirror" => inner()?.mirror().map_err(|e| at("inner", e)),
            "amplified" => inner()?.amplify().map_err(|e| at("inner", e)),
            "product" => {
                let g = v.get("group").ok_or_else(|| Error::config(format!("{pointer}/group"), "missing finite group"))?;
                let f = if let Some(n) = g.as_u64() {
                    FiniteGroup::cyclic(n as u32)
                } else {
                    match GroupKind::from_json(g, &format!("{pointer}/group"))? {
                        GroupKind::Finite(t) => t,
                        _ => return Err(Error::config(format!("{pointer}/group"), "expected a finite group")),
                    }
                };
                inner()?.product(&f).map_err(|e| at("inner", e))
            }
            "shifted" => {
                let w = inner()?;
                let by = v.get("by").ok_or_else(|| Error::config(format!("{pointer}/by"), "missing element"))?;
                let g = w.group.parse_element(by).map_err(|e| at("by", e))?;
                w.shift(&g)
            }
            other => Err(Error::config(format!("{pointer}/kind"), format!("unknown word kind {other:?}"))),
        }
    }
}

fn tokens_of(v: &Value) -> Option<Vec<String>> {
    match v {
        Value::String(s) => Some(chars(s)),
        Value::Array(a) => a.iter().map(|x| x.as_str().map(String::from)).collect(),
        _ => None,
    }
}

/// Rewrites a binary word so that symbol index 1 means "1".
fn relabel_binary(w: &Word) -> WordGenerator {
    let one = w.alphabet.index_of("1");
    let zero = w.alphabet.index_of("0");
    if one == Some(1) || (one.is_none() && zero == Some(0)) {
        return w.generator.clone();
    }
    // Alphabet is ["1", "0"] or ["1"]: swap indices in the leaves.
    map_leaves(&w.generator, &|s| 1 - s.min(1))
}

fn map_leaves(g: &WordGenerator, f: &dyn Fn(Symbol) -> Symbol) -> WordGenerator {
    match g {
        WordGenerator::Periodic { cycle } => WordGenerator::Periodic {
            cycle: cycle.iter().map(|&s| f(s)).collect(),
        },
        WordGenerator::Toeplitz { stages } => WordGenerator::Toeplitz {
            stages: stages
                .iter()
                .map(|st| ToeplitzStage {
                    symbol: f(st.symbol),
                    ..*st
                })
                .collect(),
        },
        WordGenerator::Explicit { start, symbols, fill } => WordGenerator::Explicit {
            start: *start,
            symbols: symbols.iter().map(|&s| f(s)).collect(),
            fill: f(*fill),
        },
        WordGenerator::Mirror(i) => WordGenerator::Mirror(Box::new(map_leaves(i, f))),
        WordGenerator::Amplified(i) => WordGenerator::Amplified(Box::new(map_leaves(i, f))),
        WordGenerator::Product { inner, order } => WordGenerator::Product {
            inner: Box::new(map_leaves(inner, f)),
            order: *order,
        },
        WordGenerator::Shifted { by, inner } => WordGenerator::Shifted {
            by: by.clone(),
            inner: Box::new(map_leaves(inner, f)),
        },
    }
}

fn check_toeplitz_complete(stages: &[ToeplitzStage]) -> Result<()> {
    let last = stages.last().expect("nonempty").period;
    let limit = last.min(TOEPLITZ_CHECK_CAP);
    // Scan 0, −1, 1, −2, 2, ... so the first failure has the smallest |n|.
    for m in 0..=limit {
        for n in [-m, m] {
            if !stages.iter().any(|s| n.rem_euclid(s.period) == s.residue) {
                return Err(Error::IncompleteStages(n));
            }
        }
    }
    Ok(())
}

fn eval_int(g: &WordGenerator, n: i64) -> Symbol {
    match g {
        WordGenerator::Periodic { cycle } => cycle[n.rem_euclid(cycle.len() as i64) as usize],
        WordGenerator::Toeplitz { stages } => stages
            .iter()
            .find(|s| n.rem_euclid(s.period) == s.residue)
            .or_else(|| stages.last())
            .map(|s| s.symbol)
            .expect("validated stages"),
        WordGenerator::Explicit { start, symbols, fill } => {
            let i = n - start;
            if i >= 0 && (i as usize) < symbols.len() {
                symbols[i as usize]
            } else {
                *fill
            }
        }
        WordGenerator::Mirror(inner) => eval_int(inner, -n),
        WordGenerator::Shifted { by, inner } => eval_int(inner, n - by.as_int().expect("ℤ shift")),
        WordGenerator::Amplified(_) | WordGenerator::Product { .. } => {
            panic!("integer evaluation of a non-ℤ word")
        }
    }
}

fn eval_gen(gen: &WordGenerator, kind: &GroupKind, g: &GroupElement) -> Symbol {
    match gen {
        WordGenerator::Amplified(inner) => {
            let (n, r) = g.as_dihedral().expect("D∞ element");
            eval_int(inner, if r { -n } else { n })
        }
        WordGenerator::Product { inner, .. } => {
            let (GroupKind::Product(left, _), GroupElement::Pair(a, s)) = (kind, g) else {
                panic!("product word evaluated off G × F");
            };
            if eval_gen(inner, left, a) == 1 {
                match **s {
                    GroupElement::Finite(i) => 1 + i as Symbol,
                    _ => unreachable!(),
                }
            } else {
                0
            }
        }
        WordGenerator::Shifted { by, inner } => {
            let h = kind.mul_unchecked(&kind.inv_unchecked(by), g);
            eval_gen(inner, kind, &h)
        }
        leaf => eval_int(leaf, g.as_int().expect("ℤ element")),
    }
}

fn gen_to_json(g: &WordGenerator, a: &Alphabet, group: &GroupDescriptor) -> Value {
    match g {
        WordGenerator::Periodic { cycle } => {
            json!({"kind": "periodic", "cycle": cycle.iter().map(|&s| a.name(s)).collect::<Vec<_>>()})
        }
        WordGenerator::Toeplitz { stages } => json!({
            "kind": "toeplitz",
            "stages": stages.iter().map(|s| json!([s.period, s.residue, a.name(s.symbol)])).collect::<Vec<_>>(),
        }),
        WordGenerator::Explicit { start, symbols, fill } => json!({
            "kind": "explicit",
            "start": start,
            "symbols": symbols.iter().map(|&s| a.name(s)).collect::<String>(),
            "fill": a.name(*fill),
        }),
        WordGenerator::Mirror(i) => json!({"kind": "mirror", "inner": gen_to_json(i, a, &GroupDescriptor::integers())}),
        WordGenerator::Amplified(i) => json!({"kind": "amplified", "inner": gen_to_json(i, a, &GroupDescriptor::integers())}),
        WordGenerator::Product { inner, .. } => {
            let (inner_group, f) = match &group.kind {
                GroupKind::Product(l, r) => (GroupDescriptor::new((**l).clone()), r.to_json()),
                _ => unreachable!(),
            };
            let bin = Alphabet::new(vec!["0".into(), "1".into()]).expect("binary");
            json!({"kind": "product", "inner": gen_to_json(inner, &bin, &inner_group), "group": f})
        }
        WordGenerator::Shifted { by, inner } => {
            json!({"kind": "shifted", "by": by.to_json(), "inner": gen_to_json(inner, a, group)})
        }
    }
}

/// A finite partial configuration `domain → symbols`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CylinderPattern {
    pub domain: Vec<GroupElement>,
    pub symbols: Vec<Symbol>,
}

impl CylinderPattern {
    pub fn new(domain: Vec<GroupElement>, symbols: Vec<Symbol>) -> Result<Self> {
        if domain.len() != symbols.len() {
            return Err(Error::Word("pattern domain and symbols differ in length".into()));
        }
        let distinct: BTreeSet<&GroupElement> = domain.iter().collect();
        if distinct.len() != domain.len() {
            return Err(Error::Word("pattern domain repeats an element".into()));
        }
        Ok(CylinderPattern { domain, symbols })
    }

    /// The pattern `w` shows around `g`: `i ↦ w(g·i)`.
    pub fn read(word: &Word, g: &GroupElement, domain: &[GroupElement]) -> Self {
        CylinderPattern {
            domain: domain.to_vec(),
            symbols: domain.iter().map(|d| word.eval_u(&word.group.mul_u(g, d))).collect(),
        }
    }

    /// The pattern on a ball read at the identity.
    pub fn from_ball(word: &Word, ball: &Ball) -> Self {
        Self::read(word, &word.group.identity(), ball.elements())
    }

    /// Whether `g·w` lies in this cylinder, i.e. `w(g⁻¹i) = U(i)` for all i.
    pub fn matches_translate(&self, word: &Word, g_inv: &GroupElement) -> bool {
        self.domain
            .iter()
            .zip(&self.symbols)
            .all(|(i, &s)| word.eval_u(&word.group.mul_u(g_inv, i)) == s)
    }

    pub fn to_json(&self, alphabet: &Alphabet) -> Value {
        json!({
            "domain": self.domain.iter().map(GroupElement::to_json).collect::<Vec<_>>(),
            "symbols": self.symbols.iter().map(|&s| alphabet.name(s)).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value, word: &Word, pointer: &str) -> Result<Self> {
        let dom = v
            .get("domain")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::config(format!("{pointer}/domain"), "expected array"))?;
        let syms = v
            .get("symbols")
            .ok_or_else(|| Error::config(format!("{pointer}/symbols"), "missing"))?;
        let syms = tokens_of(syms).ok_or_else(|| Error::config(format!("{pointer}/symbols"), "expected string or array"))?;
        let mut domain = Vec::new();
        for (i, d) in dom.iter().enumerate() {
            domain.push(
                word.group
                    .parse_element(d)
                    .map_err(|e| Error::config(format!("{pointer}/domain/{i}"), e.to_string()))?,
            );
        }
        let mut symbols = Vec::new();
        for (i, s) in syms.iter().enumerate() {
            symbols.push(
                word.alphabet
                    .index_of(s)
                    .ok_or_else(|| Error::config(format!("{pointer}/symbols/{i}"), format!("symbol {s:?} not in alphabet")))?,
            );
        }
        CylinderPattern::new(domain, symbols).map_err(|e| Error::config(pointer.to_string(), e.to_string()))
    }
}
