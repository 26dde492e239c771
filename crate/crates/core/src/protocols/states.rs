//! State factories: polarization Bell and GHZ states, logic Bell states and
//! concatenated GHZ (C-GHZ) states.
//!
//! Registry convention: logic qubit `i` (0-based) uses the letter `a + i`, and
//! its `M` photons are `a1 … aM`. Position group `j` is `{a_j, b_j, …}`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fock::{registry, FockBasisVector, ModeId, PhotonicState, Polarization};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    /// `+` for even parity, `-` for odd.
    pub fn from_parity(odd: bool) -> Self {
        if odd {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

impl FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "+" | "plus" | "p" => Ok(Sign::Plus),
            "-" | "minus" | "m" => Ok(Sign::Minus),
            _ => Err(Error::InvalidParameter(format!("invalid sign `{s}` (expected + or -)"))),
        }
    }
}

/// Splits `Φ+`, `phi+`, `PhiPlus`, `psi-` … into (is_phi, rest, sign).
fn parse_greek(s: &str, upper: bool) -> Option<(bool, String, Sign)> {
    let t = s.trim();
    let (phi, rest) = if let Some(r) = t.strip_prefix(if upper { "Φ" } else { "φ" }) {
        (true, r)
    } else if let Some(r) = t.strip_prefix(if upper { "Ψ" } else { "ψ" }) {
        (false, r)
    } else {
        let lower = t.to_ascii_lowercase();
        if lower.starts_with("phi") {
            (true, &t[3..])
        } else if lower.starts_with("psi") {
            (false, &t[3..])
        } else {
            return None;
        }
    };
    let rest = rest.trim_start_matches('_');
    let lower = rest.to_ascii_lowercase();
    let (body, sign) = [("plus", Sign::Plus), ("minus", Sign::Minus), ("+", Sign::Plus), ("-", Sign::Minus)]
        .into_iter()
        .find_map(|(suffix, sign)| lower.strip_suffix(suffix).map(|b| (b.to_string(), sign)))?;
    Some((phi, body.trim_end_matches('_').to_string(), sign))
}

/// Two-photon polarization Bell states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BellLabel {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [BellLabel::PhiPlus, BellLabel::PhiMinus, BellLabel::PsiPlus, BellLabel::PsiMinus];

    fn parts(self) -> (bool, Sign) {
        match self {
            BellLabel::PhiPlus => (true, Sign::Plus),
            BellLabel::PhiMinus => (true, Sign::Minus),
            BellLabel::PsiPlus => (false, Sign::Plus),
            BellLabel::PsiMinus => (false, Sign::Minus),
        }
    }

    fn from_parts(phi: bool, sign: Sign) -> Self {
        match (phi, sign) {
            (true, Sign::Plus) => BellLabel::PhiPlus,
            (true, Sign::Minus) => BellLabel::PhiMinus,
            (false, Sign::Plus) => BellLabel::PsiPlus,
            (false, Sign::Minus) => BellLabel::PsiMinus,
        }
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (phi, sign) = self.parts();
        write!(f, "{}{sign}", if phi { "φ" } else { "ψ" })
    }
}

impl FromStr for BellLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match parse_greek(s, false) {
            Some((phi, body, sign)) if body.is_empty() => Ok(Self::from_parts(phi, sign)),
            _ => Err(Error::InvalidParameter(format!("invalid Bell label `{s}`"))),
        }
    }
}

/// The four logic Bell states of two GHZ-encoded logic qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LogicBell {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl LogicBell {
    pub const ALL: [LogicBell; 4] = [LogicBell::PhiPlus, LogicBell::PhiMinus, LogicBell::PsiPlus, LogicBell::PsiMinus];

    pub fn is_phi(self) -> bool {
        matches!(self, LogicBell::PhiPlus | LogicBell::PhiMinus)
    }

    pub fn sign(self) -> Sign {
        match self {
            LogicBell::PhiPlus | LogicBell::PsiPlus => Sign::Plus,
            LogicBell::PhiMinus | LogicBell::PsiMinus => Sign::Minus,
        }
    }

    pub fn phi(sign: Sign) -> Self {
        match sign {
            Sign::Plus => LogicBell::PhiPlus,
            Sign::Minus => LogicBell::PhiMinus,
        }
    }

    fn from_parts(phi: bool, sign: Sign) -> Self {
        match (phi, sign) {
            (true, s) => Self::phi(s),
            (false, Sign::Plus) => LogicBell::PsiPlus,
            (false, Sign::Minus) => LogicBell::PsiMinus,
        }
    }
}

impl fmt::Display for LogicBell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.is_phi() { "Φ" } else { "Ψ" }, self.sign())
    }
}

impl FromStr for LogicBell {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match parse_greek(s, true) {
            Some((phi, body, sign)) if body.is_empty() => Ok(Self::from_parts(phi, sign)),
            _ => Err(Error::InvalidParameter(format!("invalid logic Bell label `{s}`"))),
        }
    }
}

/// Names one input state: a logic Bell state, or a C-GHZ family member
/// `Φ_k^±` (displayed `Φ1+`, `Φ2-`, …).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LogicStateLabel {
    Bell(LogicBell),
    Cghz { index: u32, sign: Sign },
}

impl fmt::Display for LogicStateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogicStateLabel::Bell(b) => b.fmt(f),
            LogicStateLabel::Cghz { index, sign } => write!(f, "Φ{index}{sign}"),
        }
    }
}

impl FromStr for LogicStateLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("invalid state label `{s}`"));
        let (phi, body, sign) = parse_greek(s, true).ok_or_else(bad)?;
        if body.is_empty() {
            return Ok(LogicStateLabel::Bell(LogicBell::from_parts(phi, sign)));
        }
        if !phi {
            return Err(bad());
        }
        let index = body.parse::<u32>().map_err(|_| bad())?;
        Ok(LogicStateLabel::Cghz { index, sign })
    }
}

impl Serialize for LogicStateLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LogicStateLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn check_distinct<S: AsRef<str>>(labels: &[S]) -> Result<()> {
    for (i, a) in labels.iter().enumerate() {
        if labels[..i].iter().any(|b| b.as_ref() == a.as_ref()) {
            return Err(Error::DuplicateLabel(a.as_ref().to_string()));
        }
    }
    Ok(())
}

pub fn make_bell(label: BellLabel, x: &str, y: &str) -> Result<PhotonicState> {
    check_distinct(&[x, y])?;
    let (phi, sign) = label.parts();
    let ket = |px: Polarization, py: Polarization| {
        FockBasisVector::new().with(ModeId::new(x, px), 1).with(ModeId::new(y, py), 1)
    };
    let (first, second) = if phi {
        (ket(Polarization::H, Polarization::H), ket(Polarization::V, Polarization::V))
    } else {
        (ket(Polarization::H, Polarization::V), ket(Polarization::V, Polarization::H))
    };
    PhotonicState::from_terms(
        registry(&[x, y]),
        [(first, c(FRAC_1_SQRT_2)), (second, c(sign.factor() * FRAC_1_SQRT_2))],
    )
}

/// `(|H…H> ± |V…V>)/sqrt2` over `labels`.
pub fn make_ghz<S: AsRef<str>>(m: usize, sign: Sign, labels: &[S]) -> Result<PhotonicState> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("GHZ state needs at least 2 photons, got {m}")));
    }
    if labels.len() != m {
        return Err(Error::InvalidParameter(format!("expected {m} spatial labels, got {}", labels.len())));
    }
    check_distinct(labels)?;
    let all = |p: Polarization| labels.iter().map(|l| (ModeId::new(l.as_ref(), p), 1)).collect::<FockBasisVector>();
    PhotonicState::from_terms(
        registry(labels),
        [(all(Polarization::H), c(FRAC_1_SQRT_2)), (all(Polarization::V), c(sign.factor() * FRAC_1_SQRT_2))],
    )
}

/// Letter naming logic qubit `i` (0-based).
pub fn logic_letter(i: usize) -> char {
    (b'a' + i as u8) as char
}

/// Spatial labels of logic qubit `i`: `[a1, …, aM]` for `i = 0`.
pub fn logic_qubit_labels(i: usize, m: usize) -> Vec<String> {
    (1..=m).map(|j| format!("{}{j}", logic_letter(i))).collect()
}

/// Spatial labels of position group `j` (1-based): `[a_j, b_j, …]`.
pub fn group_labels(n: usize, j: usize) -> Vec<String> {
    (0..n).map(|i| format!("{}{j}", logic_letter(i))).collect()
}

/// Full registry of an `n`-logic-qubit, `m`-photon-per-qubit input.
pub fn canonical_registry(n: usize, m: usize) -> Vec<ModeId> {
    let labels: Vec<String> = (0..n).flat_map(|i| logic_qubit_labels(i, m)).collect();
    registry(&labels)
}

fn check_sizes(n: usize, m: usize) -> Result<()> {
    if n < 2 || m < 2 {
        return Err(Error::InvalidParameter(format!("N and M must both be at least 2 (got N={n}, M={m})")));
    }
    if n > 26 {
        return Err(Error::InvalidParameter(format!("at most 26 logic qubits are supported (got N={n})")));
    }
    Ok(())
}

fn product_of_ghz(m: usize, signs: &[Sign]) -> Result<PhotonicState> {
    let mut acc: Option<PhotonicState> = None;
    for (i, &s) in signs.iter().enumerate() {
        let g = make_ghz(m, s, &logic_qubit_labels(i, m))?;
        acc = Some(match acc {
            None => g,
            Some(a) => a.tensor(&g)?,
        });
    }
    acc.ok_or(Error::EmptyModeList)
}

fn superpose_half(first: &PhotonicState, second: &PhotonicState, sign: Sign) -> Result<PhotonicState> {
    PhotonicState::superpose(&[(c(FRAC_1_SQRT_2), first), (c(sign.factor() * FRAC_1_SQRT_2), second)])
}

/// Logic Bell state of two `m`-photon GHZ logic qubits A (`a1…aM`) and B
/// (`b1…bM`): `Φ± = (G+G+ ± G-G-)/sqrt2`, `Ψ± = (G+G- ± G-G+)/sqrt2`.
pub fn make_logic_bell(label: LogicBell, m: usize) -> Result<PhotonicState> {
    check_sizes(2, m)?;
    let (p, q) = if label.is_phi() { (Sign::Plus, Sign::Plus) } else { (Sign::Plus, Sign::Minus) };
    let first = product_of_ghz(m, &[p, q])?;
    let second = product_of_ghz(m, &[p.flipped(), q.flipped()])?;
    superpose_half(&first, &second, label.sign())
}

/// Which logic qubits carry `GHZ-` in the first branch of family member
/// `index`: bit `i` of `index - 1` flags qubit `i`, and the last qubit is
/// always `GHZ+` there (the complement lives in the second branch).
pub fn cghz_flips(n: usize, index: u32) -> Vec<bool> {
    let k = index.saturating_sub(1);
    (0..n).map(|i| i + 1 < n && (k >> i) & 1 == 1).collect()
}

pub fn cghz_family_size(n: usize) -> u32 {
    1u32 << (n - 1)
}

/// C-GHZ family member `Φ_k^±` for `n` logic qubits of `m` photons each:
/// `(⊗ G^{s_i} ± ⊗ G^{-s_i})/sqrt2` with the flips of [`cghz_flips`].
/// `index = 1` is `(G+^{⊗n} ± G-^{⊗n})/sqrt2`.
pub fn make_cghz(n: usize, m: usize, index: u32, sign: Sign) -> Result<PhotonicState> {
    check_sizes(n, m)?;
    if index < 1 || index > cghz_family_size(n) {
        return Err(Error::InvalidParameter(format!(
            "index {index} out of range 1..={} for N={n}",
            cghz_family_size(n)
        )));
    }
    let first: Vec<Sign> = cghz_flips(n, index).into_iter().map(Sign::from_parity).collect();
    let second: Vec<Sign> = first.iter().map(|s| s.flipped()).collect();
    superpose_half(&product_of_ghz(m, &first)?, &product_of_ghz(m, &second)?, sign)
}

/// The state a label denotes, for `n` logic qubits of `m` photons.
pub fn make_labeled(label: LogicStateLabel, n: usize, m: usize) -> Result<PhotonicState> {
    match label {
        LogicStateLabel::Bell(b) if n == 2 => make_logic_bell(b, m),
        LogicStateLabel::Bell(_) => Err(Error::InvalidParameter(format!("logic Bell labels need N=2, got N={n}"))),
        LogicStateLabel::Cghz { index, sign } => make_cghz(n, m, index, sign),
    }
}

/// All labels of the family for `n` logic qubits: the four logic Bell labels
/// for `n = 2`, otherwise `Φ_k^±` for every `k`.
pub fn family_labels(n: usize) -> Vec<LogicStateLabel> {
    if n == 2 {
        LogicBell::ALL.into_iter().map(LogicStateLabel::Bell).collect()
    } else {
        (1..=cghz_family_size(n))
            .flat_map(|index| Sign::BOTH.into_iter().map(move |sign| LogicStateLabel::Cghz { index, sign }))
            .collect()
    }
}
