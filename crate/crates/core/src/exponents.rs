//! Critical exponents and admissibility regions.
//!
//! The three classical exponents are
//!
//! * Fujita: `p_F(n) = 1 + 2/n`,
//! * Strauss: `p_S(n)` = positive root of `2 + (n+1)p − (n−1)p² = 0`,
//! * Glassey: `p_G(n) = (n+1)/(n−1)`,
//!
//! and the admissibility checks decide which lifespan upper bound applies to
//! a parameter set `(n, μ, β, p, q)`:
//!
//! * combined regime: `p > 1` and
//!   `1 < q < min{1 + 4/((n−1)p − 2), 2n/(n−2)}` (no cap for n = 1;
//!   each cap is +∞ where its denominator is ≤ 0), giving
//!   `T ≤ C ε^{−k₁}`, `k₁ = 2p(q−1)/(2q+2−(n−1)p(q−1))`;
//! * improved regime: `p > 2n/(n−1)` and `1 < q < (n+1)/(n−1)` (n ≥ 2),
//!   giving `T ≤ C ε^{−k₂}`, `k₂ = (q−1)/(q+1−n(q−1))`.
//!
//! All inequalities are implemented exactly as stated: strict `<` except the
//! upper cap `p ≤ 2n/(n−1)` of the undamped blow-up region. Boundary values
//! fail the strict side. At n = 2 the cap `2n/(n−2)` is treated as +∞.

use crate::error::{Error, Result};
use crate::num::Real;
use crate::params::ModelParams;

/// Evaluates the quadratic `2 + (n+1)p − (n−1)p²` whose positive root is the
/// Strauss exponent.
pub fn strauss_quadratic<T: Real>(p: T, n: u32) -> T {
    let nf = T::of_u32(n);
    T::of(2.0) + (nf + T::one()) * p - (nf - T::one()) * p * p
}

/// Fujita exponent `1 + 2/n`.
pub fn fujita<T: Real>(n: u32) -> Result<T> {
    if n < 1 {
        return Err(Error::Config("n: fujita exponent needs n >= 1".into()));
    }
    Ok(T::one() + T::of(2.0) / T::of_u32(n))
}

/// Strauss exponent: the larger root of `(n−1)p² − (n+1)p − 2 = 0`,
/// computed by the numerically stable quadratic formula. Errors for n = 1
/// (see [`strauss_or_infinity`] for the +∞ convention).
pub fn strauss<T: Real>(n: u32) -> Result<T> {
    if n < 2 {
        return Err(Error::Condition(
            "n >= 2: the Strauss exponent is +infinity for n = 1".into(),
        ));
    }
    let nf = T::of_u32(n);
    let a = nf - T::one();
    let b = nf + T::one();
    let disc = b * b + T::of(8.0) * a;
    // larger root = (b + sqrt(disc)) / (2a); no cancellation since b > 0
    Ok((b + disc.sqrt()) / (T::of(2.0) * a))
}

/// Strauss exponent with the documented `+infinity` sentinel at n = 1.
pub fn strauss_or_infinity<T: Real>(n: u32) -> T {
    strauss(n).unwrap_or_else(|_| T::infinity())
}

/// Glassey exponent `(n+1)/(n−1)`. Errors for n = 1.
pub fn glassey<T: Real>(n: u32) -> Result<T> {
    if n < 2 {
        return Err(Error::Condition(
            "n >= 2: the Glassey exponent is +infinity for n = 1".into(),
        ));
    }
    let nf = T::of_u32(n);
    Ok((nf + T::one()) / (nf - T::one()))
}

/// Glassey exponent with the documented `+infinity` sentinel at n = 1.
pub fn glassey_or_infinity<T: Real>(n: u32) -> T {
    glassey(n).unwrap_or_else(|_| T::infinity())
}

/// Relation used when comparing two sides of an inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Less,
    LessEq,
    Greater,
    GreaterEq,
}

impl Relation {
    fn holds<T: Real>(self, lhs: T, rhs: T) -> bool {
        match self {
            Relation::Less => lhs < rhs,
            Relation::LessEq => lhs <= rhs,
            Relation::Greater => lhs > rhs,
            Relation::GreaterEq => lhs >= rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Less => "<",
            Relation::LessEq => "<=",
            Relation::Greater => ">",
            Relation::GreaterEq => ">=",
        }
    }
}

/// One inequality of a condition check, with both sides' values retained
/// for reporting.
#[derive(Debug, Clone)]
pub struct ConditionCheck<T> {
    /// Human-readable statement, e.g. `q < 1 + 4/((n-1)p - 2)`.
    pub inequality: String,
    pub lhs: T,
    pub relation: Relation,
    pub rhs: T,
    pub satisfied: bool,
}

impl<T: Real> ConditionCheck<T> {
    fn new(inequality: impl Into<String>, lhs: T, relation: Relation, rhs: T) -> Self {
        let satisfied = relation.holds(lhs, rhs);
        Self {
            inequality: inequality.into(),
            lhs,
            relation,
            rhs,
            satisfied,
        }
    }

    /// Set membership rendered as a closed range check.
    fn member(inequality: impl Into<String>, lhs: T, lo: T, hi: T) -> Self {
        Self {
            inequality: inequality.into(),
            lhs,
            relation: Relation::LessEq,
            rhs: hi,
            satisfied: lhs >= lo && lhs <= hi,
        }
    }

    /// Symbol of the relation being checked.
    pub fn relation_symbol(&self) -> &'static str {
        self.relation.symbol()
    }

    /// `inequality: lhs <sym> rhs` rendered with values.
    pub fn describe(&self) -> String {
        format!(
            "{} [{} {} {}]{}",
            self.inequality,
            self.lhs,
            self.relation.symbol(),
            self.rhs,
            if self.satisfied { "" } else { " FAILED" }
        )
    }
}

/// Structured outcome of an admissibility check: every inequality with both
/// sides' values, rather than a bare boolean.
#[derive(Debug, Clone)]
pub struct ConditionReport<T> {
    /// Which region was checked, e.g. `combined-regime bound`.
    pub name: &'static str,
    pub checks: Vec<ConditionCheck<T>>,
}

impl<T: Real> ConditionReport<T> {
    pub fn satisfied(&self) -> bool {
        self.checks.iter().all(|c| c.satisfied)
    }

    pub fn first_failure(&self) -> Option<&ConditionCheck<T>> {
        self.checks.iter().find(|c| !c.satisfied)
    }

    /// Condition error naming the first failing inequality, if any.
    pub fn as_error(&self) -> Option<Error> {
        self.first_failure()
            .map(|c| Error::Condition(format!("{}: {}", self.name, c.describe())))
    }

    /// Errors unless every inequality holds.
    pub fn require(&self) -> Result<()> {
        match self.as_error() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// Cap `1 + 4/((n−1)p − 2)`, read as +∞ when `(n−1)p − 2 <= 0`.
fn derivative_cap<T: Real>(n: u32, p: T) -> T {
    let denom = (T::of_u32(n) - T::one()) * p - T::of(2.0);
    if denom > T::zero() {
        T::one() + T::of(4.0) / denom
    } else {
        T::infinity()
    }
}

/// Cap `2n/(n−2)`, read as +∞ for n <= 2.
fn sobolev_cap<T: Real>(n: u32) -> T {
    if n >= 3 {
        T::of(2.0) * T::of_u32(n) / (T::of_u32(n) - T::of(2.0))
    } else {
        T::infinity()
    }
}

/// Applicability of the combined-regime lifespan bound
/// (`mu > 0`, `beta > 1`, `p > 1`,
/// `1 < q < min{1 + 4/((n−1)p − 2), 2n/(n−2)}`).
pub fn check_combined<T: Real>(params: &ModelParams<T>) -> ConditionReport<T> {
    let one = T::one();
    ConditionReport {
        name: "combined-regime bound",
        checks: vec![
            ConditionCheck::new("mu > 0", params.mu, Relation::Greater, T::zero()),
            ConditionCheck::new("beta > 1", params.beta, Relation::Greater, one),
            ConditionCheck::new("p > 1", params.p, Relation::Greater, one),
            ConditionCheck::new("q > 1", params.q, Relation::Greater, one),
            ConditionCheck::new(
                "q < 1 + 4/((n-1)p - 2)",
                params.q,
                Relation::Less,
                derivative_cap(params.n, params.p),
            ),
            ConditionCheck::new(
                "q < 2n/(n-2)",
                params.q,
                Relation::Less,
                sobolev_cap(params.n),
            ),
        ],
    }
}

/// Applicability of the improved lifespan bound
/// (`n >= 2`, `mu > 0`, `beta > 1`, `p > 2n/(n−1)`, `1 < q < (n+1)/(n−1)`).
pub fn check_improved<T: Real>(params: &ModelParams<T>) -> ConditionReport<T> {
    let one = T::one();
    let nf = params.nf();
    let mut checks = vec![ConditionCheck::new(
        "n >= 2",
        nf,
        Relation::GreaterEq,
        T::of(2.0),
    )];
    if params.n >= 2 {
        checks.push(ConditionCheck::new(
            "mu > 0",
            params.mu,
            Relation::Greater,
            T::zero(),
        ));
        checks.push(ConditionCheck::new(
            "beta > 1",
            params.beta,
            Relation::Greater,
            one,
        ));
        checks.push(ConditionCheck::new(
            "p > 2n/(n-1)",
            params.p,
            Relation::Greater,
            T::of(2.0) * nf / (nf - one),
        ));
        checks.push(ConditionCheck::new(
            "q > 1",
            params.q,
            Relation::Greater,
            one,
        ));
        checks.push(ConditionCheck::new(
            "q < (n+1)/(n-1)",
            params.q,
            Relation::Less,
            (nf + one) / (nf - one),
        ));
    }
    ConditionReport {
        name: "improved-regime bound",
        checks,
    }
}

/// Known blow-up region of the undamped problem:
/// `max(1, 2/(n−1)) < p <= 2n/(n−1)` together with
/// `1 < q < min{1 + 4/((n−1)p − 2), 2n/(n−2)}`.
pub fn check_undamped_blowup<T: Real>(params: &ModelParams<T>) -> ConditionReport<T> {
    let one = T::one();
    let nf = params.nf();
    let mut checks = vec![ConditionCheck::new(
        "n >= 2",
        nf,
        Relation::GreaterEq,
        T::of(2.0),
    )];
    if params.n >= 2 {
        let lower = one.max(T::of(2.0) / (nf - one));
        checks.push(ConditionCheck::new(
            "p > max(1, 2/(n-1))",
            params.p,
            Relation::Greater,
            lower,
        ));
        checks.push(ConditionCheck::new(
            "p <= 2n/(n-1)",
            params.p,
            Relation::LessEq,
            T::of(2.0) * nf / (nf - one),
        ));
        checks.push(ConditionCheck::new(
            "q > 1",
            params.q,
            Relation::Greater,
            one,
        ));
        checks.push(ConditionCheck::new(
            "q < 1 + 4/((n-1)p - 2)",
            params.q,
            Relation::Less,
            derivative_cap(params.n, params.p),
        ));
        checks.push(ConditionCheck::new(
            "q < 2n/(n-2)",
            params.q,
            Relation::Less,
            sobolev_cap(params.n),
        ));
    }
    ConditionReport {
        name: "undamped blow-up region",
        checks,
    }
}

/// Known global-existence region of the undamped problem (n = 2, 3):
/// `p > p_G(n)`, `q > p_S(n)` and `(q−1)((n−1)p − 2) >= 4`.
pub fn check_global_existence<T: Real>(params: &ModelParams<T>) -> ConditionReport<T> {
    let one = T::one();
    let nf = params.nf();
    let mut checks = vec![ConditionCheck::member(
        "n in {2, 3}",
        nf,
        T::of(2.0),
        T::of(3.0),
    )];
    if params.n == 2 || params.n == 3 {
        checks.push(ConditionCheck::new(
            "p > glassey(n)",
            params.p,
            Relation::Greater,
            glassey_or_infinity(params.n),
        ));
        checks.push(ConditionCheck::new(
            "q > strauss(n)",
            params.q,
            Relation::Greater,
            strauss_or_infinity(params.n),
        ));
        checks.push(ConditionCheck::new(
            "(q-1)((n-1)p - 2) >= 4",
            (params.q - one) * ((nf - one) * params.p - T::of(2.0)),
            Relation::GreaterEq,
            T::of(4.0),
        ));
    }
    ConditionReport {
        name: "global-existence region",
        checks,
    }
}

/// Lifespan exponent `k₁ = 2p(q−1)/(2q+2−(n−1)p(q−1))` of the combined-regime
/// bound `T <= C ε^{−k₁}`. Errors unless [`check_combined`] holds (which
/// guarantees a positive denominator).
pub fn lifespan_exponent_combined<T: Real>(params: &ModelParams<T>) -> Result<T> {
    check_combined(params).require()?;
    let (nf, p, q) = (params.nf(), params.p, params.q);
    let one = T::one();
    let two = T::of(2.0);
    let denom = two * q + two - (nf - one) * p * (q - one);
    Ok(two * p * (q - one) / denom)
}

/// Lifespan exponent `k₂ = (q−1)/(q+1−n(q−1))` of the improved bound
/// `T <= C ε^{−k₂}`. Errors unless [`check_improved`] holds.
pub fn lifespan_exponent_improved<T: Real>(params: &ModelParams<T>) -> Result<T> {
    check_improved(params).require()?;
    let (nf, q) = (params.nf(), params.q);
    let one = T::one();
    Ok((q - one) / (q + one - nf * (q - one)))
}

/// Whether the improved bound beats the combined one, decided by the
/// algebraic test `p > 2(q+1)/(2(q+1)−(n+1)(q−1))` (strict). Returns false
/// for n < 2 or where the threshold's denominator is not positive (the
/// improved bound cannot apply there).
pub fn improvement_predicate<T: Real>(params: &ModelParams<T>) -> bool {
    if params.n < 2 || !(params.q > T::one()) {
        return false;
    }
    let (nf, q) = (params.nf(), params.q);
    let one = T::one();
    let two = T::of(2.0);
    let denom = two * (q + one) - (nf + one) * (q - one);
    if !(denom > T::zero()) {
        return false;
    }
    params.p > two * (q + one) / denom
}

/// Constructs a supercritical pair `p₀ = (n+1)/(n−1) + δ₁`,
/// `q₀ = 1 + 4/(n−1+(n+1)δ₁)` with `p₀ > p_G(n)` and
/// `p_S(n) < q₀ < min{1−δ₂+4/(n−1), 1+4/((n−1)p₀−2)}`, verifying each link
/// numerically and erroring with the failing link identified.
pub fn supercritical_pair<T: Real>(n: u32, delta1: T, delta2: T) -> Result<(T, T)> {
    if n < 2 {
        return Err(Error::Config("n: supercritical pair needs n >= 2".into()));
    }
    if !(delta1 > T::zero()) || !(delta2 > T::zero()) {
        return Err(Error::Config("delta1, delta2 must be > 0".into()));
    }
    let one = T::one();
    let four = T::of(4.0);
    let nf = T::of_u32(n);
    let p0 = (nf + one) / (nf - one) + delta1;
    let q0 = one + four / (nf - one + (nf + one) * delta1);

    let links = [
        ConditionCheck::new("p0 > glassey(n)", p0, Relation::Greater, glassey(n)?),
        ConditionCheck::new("q0 > strauss(n)", q0, Relation::Greater, strauss(n)?),
        ConditionCheck::new(
            "q0 < 1 - delta2 + 4/(n-1)",
            q0,
            Relation::Less,
            one - delta2 + four / (nf - one),
        ),
        ConditionCheck::new(
            "q0 < 1 + 4/((n-1)p0 - 2)",
            q0,
            Relation::Less,
            derivative_cap(n, p0),
        ),
    ];
    for link in &links {
        if !link.satisfied {
            return Err(Error::Condition(format!(
                "supercritical pair chain: {}",
                link.describe()
            )));
        }
    }
    Ok((p0, q0))
}

/// Regime classification of a parameter set: which bounds apply, the known
/// undamped regions, and the resulting lifespan exponents.
#[derive(Debug, Clone)]
pub struct RegimeReport<T> {
    pub combined: ConditionReport<T>,
    pub improved: ConditionReport<T>,
    pub undamped_blowup: ConditionReport<T>,
    pub global_existence: ConditionReport<T>,
    /// `k₁`, present iff the combined-regime bound applies.
    pub exponent_combined: Option<T>,
    /// `k₂`, present iff the improved bound applies.
    pub exponent_improved: Option<T>,
    /// Improved bound strictly better (implies the improved bound applies).
    pub improved_bound_better: bool,
}

impl<T: Real> RegimeReport<T> {
    pub fn combined_applicable(&self) -> bool {
        self.combined.satisfied()
    }

    pub fn improved_applicable(&self) -> bool {
        self.improved.satisfied()
    }
}

/// Classifies `params` against every region at once.
pub fn regime_report<T: Real>(params: &ModelParams<T>) -> RegimeReport<T> {
    let combined = check_combined(params);
    let improved = check_improved(params);
    let exponent_combined = combined
        .satisfied()
        .then(|| lifespan_exponent_combined(params).expect("checked"));
    let exponent_improved = improved
        .satisfied()
        .then(|| lifespan_exponent_improved(params).expect("checked"));
    let improved_bound_better = improved.satisfied() && improvement_predicate(params);
    RegimeReport {
        combined,
        improved,
        undamped_blowup: check_undamped_blowup(params),
        global_existence: check_global_existence(params),
        exponent_combined,
        exponent_improved,
        improved_bound_better,
    }
}
