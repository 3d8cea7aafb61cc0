//! Consolidated balance sheets, trades and balance-sheet metrics.
//!
//! Deposits live in a single ledger: the investors' deposit holdings are the
//! banks' deposit liabilities `BankState::y`.

use serde::{Deserialize, Serialize};

use crate::beliefs::Belief;
use crate::demand;
use crate::error::{ModelError, Result};
use crate::format::real;

/// Model parameters shared by banks and investors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    /// Tolerated probability of bank insolvency.
    pub eps: f64,
    /// Fraction of money in circulation held as currency.
    pub mu: f64,
    /// Investor CRRA coefficient.
    pub lambda: f64,
    /// Minimum capital-to-assets ratio; zero disables the requirement.
    pub gamma_min: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    eps: f64,
    mu: f64,
    lambda: f64,
    #[serde(default)]
    gamma_min: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = ModelError;
    fn try_from(r: RawParams) -> Result<Self> {
        ModelParams::new(r.eps, r.mu, r.lambda, r.gamma_min)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            eps: p.eps,
            mu: p.mu,
            lambda: p.lambda,
            gamma_min: p.gamma_min,
        }
    }
}

impl ModelParams {
    pub fn new(eps: f64, mu: f64, lambda: f64, gamma_min: f64) -> Result<Self> {
        let p = Self {
            eps,
            mu,
            lambda,
            gamma_min,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(ModelError::Domain(format!("eps = {} must lie in (0, 1)", self.eps)));
        }
        if !(self.mu >= 0.0 && self.mu < 1.0) {
            return Err(ModelError::Domain(format!("mu = {} must lie in [0, 1)", self.mu)));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) || self.lambda == 1.0 {
            return Err(ModelError::Domain(format!(
                "lambda = {} must be positive and not 1",
                self.lambda
            )));
        }
        if !(0.0..=1.0).contains(&self.gamma_min) {
            return Err(ModelError::Domain(format!(
                "gamma_min = {} must lie in [0, 1]",
                self.gamma_min
            )));
        }
        Ok(())
    }

    /// The parameters of the worked example: 1% insolvency tolerance, 10%
    /// currency, CRRA coefficient 15, no capital requirement.
    pub fn example() -> Self {
        Self {
            eps: 0.01,
            mu: 0.1,
            lambda: 15.0,
            gamma_min: 0.0,
        }
    }

    pub fn with_gamma_min(mut self, gamma_min: f64) -> Result<Self> {
        self.gamma_min = gamma_min;
        self.validate()?;
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BankState {
    /// Bonds held, in units of face value.
    pub x: f64,
    /// Reserves.
    pub r: f64,
    /// Deposits owed to investors.
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvestorState {
    /// Bonds held.
    pub z: f64,
    /// Currency.
    pub c: f64,
}

/// Both balance sheets, the last clearing price and the belief they are
/// (supposed to be) consistent with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketState {
    pub bank: BankState,
    pub investor: InvestorState,
    pub price: f64,
    pub belief: Belief,
}

/// Denominator used when reporting leverage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeverageBasis {
    /// `(pi x + r) / e`
    #[default]
    TotalAssets,
    /// `pi x / e`
    BondAssets,
}

impl BankState {
    pub fn equity(&self, pi: f64) -> f64 {
        pi * self.x + self.r - self.y
    }

    /// Price below which equity is negative, `(y - r) / x`, floored at zero.
    pub fn insolvency_price(&self) -> Result<f64> {
        if self.x <= 0.0 {
            return Err(ModelError::Degenerate("insolvency price needs x > 0".into()));
        }
        Ok(((self.y - self.r) / self.x).max(0.0))
    }

    pub fn leverage(&self, pi: f64) -> Result<f64> {
        self.leverage_with(pi, LeverageBasis::TotalAssets)
    }

    pub fn leverage_with(&self, pi: f64, basis: LeverageBasis) -> Result<f64> {
        let e = self.equity(pi);
        if e <= 0.0 {
            return Err(ModelError::Insolvent { equity: e });
        }
        let assets = match basis {
            LeverageBasis::TotalAssets => pi * self.x + self.r,
            LeverageBasis::BondAssets => pi * self.x,
        };
        Ok(assets / e)
    }

    /// Equity over the market value of bond holdings.
    pub fn capital_ratio(&self, pi: f64) -> Result<f64> {
        if self.x <= 0.0 || pi <= 0.0 {
            return Err(ModelError::Degenerate("capital ratio needs x > 0 and pi > 0".into()));
        }
        Ok(self.equity(pi) / (pi * self.x))
    }
}

pub fn equity(bank: &BankState, pi: f64) -> f64 {
    bank.equity(pi)
}

pub fn insolvency_price(bank: &BankState) -> Result<f64> {
    bank.insolvency_price()
}

pub fn leverage(bank: &BankState, pi: f64) -> Result<f64> {
    bank.leverage(pi)
}

pub fn capital_ratio(bank: &BankState, pi: f64) -> Result<f64> {
    bank.capital_ratio(pi)
}

/// Result of [`verify_consistency`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub bank_excess: f64,
    pub investor_excess: f64,
    pub consistent: bool,
}

impl MarketState {
    /// Money supply: deposits plus currency.
    pub fn money_supply(&self) -> f64 {
        self.bank.y + self.investor.c
    }

    pub fn total_bonds(&self) -> f64 {
        self.bank.x + self.investor.z
    }

    /// Reserves plus currency.
    pub fn high_powered_money(&self) -> f64 {
        self.bank.r + self.investor.c
    }

    pub fn with_belief(mut self, belief: Belief) -> Self {
        self.belief = belief;
        self
    }

    /// Checks the invariants required of a starting state: nonnegative
    /// holdings, both sectors holding bonds, solvent banks and a currency
    /// share equal to `mu`.
    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        let b = &self.bank;
        let i = &self.investor;
        if [b.x, b.r, b.y, i.z, i.c].iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(ModelError::Domain("balance-sheet entries must be finite and nonnegative".into()));
        }
        if !(self.price > 0.0 && self.price <= 1.0) {
            return Err(ModelError::Domain(format!("price {} outside (0, 1]", self.price)));
        }
        if b.x <= 0.0 || i.z <= 0.0 {
            return Err(ModelError::Degenerate("banks and investors must both hold bonds".into()));
        }
        if b.equity(self.price) < 0.0 {
            return Err(ModelError::Degenerate(format!(
                "banks insolvent at the initial price (equity {})",
                b.equity(self.price)
            )));
        }
        let money = b.y + i.c;
        if money > 0.0 && (i.c / money - params.mu).abs() > 1e-9 {
            return Err(ModelError::Domain(format!(
                "currency share {} differs from mu = {}",
                i.c / money,
                params.mu
            )));
        }
        Ok(())
    }

    /// Executes a purchase of `d` bonds by the banks at price `pi`.
    ///
    /// The banks pay `mu pi d` in reserves-turned-currency and credit
    /// `(1 - mu) pi d` to deposits; `d < 0` runs the same entries backwards.
    pub fn apply_trade(&self, d: f64, pi: f64, mu: f64) -> Result<MarketState> {
        if !(pi > 0.0 && pi <= 1.0) {
            return Err(ModelError::InfeasibleTrade(format!("price {pi} outside (0, 1]")));
        }
        if !d.is_finite() {
            return Err(ModelError::InfeasibleTrade(format!("quantity {d} is not finite")));
        }
        let b = self.bank;
        let i = self.investor;
        let slack = 1e-9 * (1.0 + b.x + i.z + b.r + b.y + i.c);
        let cash = pi * d;
        if d < -b.x - slack {
            return Err(ModelError::InfeasibleTrade(format!(
                "banks cannot sell {} bonds holding {}",
                -d, b.x
            )));
        }
        if mu * cash > b.r + slack {
            return Err(ModelError::InfeasibleTrade(format!(
                "reserve drain {} exceeds reserves {}",
                mu * cash,
                b.r
            )));
        }
        if d > i.z + slack {
            return Err(ModelError::InfeasibleTrade(format!(
                "investors cannot sell {d} bonds holding {}",
                i.z
            )));
        }
        if -(1.0 - mu) * cash > b.y + slack || -mu * cash > i.c + slack {
            return Err(ModelError::InfeasibleTrade(format!(
                "investors cannot pay {} for {} bonds",
                -cash, -d
            )));
        }
        let clamp = |v: f64| if v < 0.0 && v > -slack { 0.0 } else { v };
        Ok(MarketState {
            bank: BankState {
                x: clamp(b.x + d),
                r: clamp(b.r - mu * cash),
                y: clamp(b.y + (1.0 - mu) * cash),
            },
            investor: InvestorState {
                z: clamp(i.z - d),
                c: clamp(i.c + mu * cash),
            },
            price: pi,
            belief: self.belief,
        })
    }

    /// Serializes to the flat key-value state document.
    pub fn to_document(&self) -> String {
        let fields = [
            ("alpha", self.belief.alpha()),
            ("beta", self.belief.beta()),
            ("price", self.price),
            ("bank.x", self.bank.x),
            ("bank.r", self.bank.r),
            ("bank.y", self.bank.y),
            ("investor.z", self.investor.z),
            ("investor.c", self.investor.c),
        ];
        let body: Vec<String> = fields.iter().map(|(k, v)| format!("  \"{k}\": {}", real(*v))).collect();
        format!("{{\n{}\n}}\n", body.join(",\n"))
    }

    pub fn from_document(text: &str) -> Result<MarketState> {
        let doc: StateDocument =
            serde_json::from_str(text).map_err(|e| ModelError::Domain(format!("state document: {e}")))?;
        doc.try_into()
    }
}

/// Flat key-value form of a [`MarketState`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDocument {
    pub alpha: f64,
    pub beta: f64,
    pub price: f64,
    #[serde(rename = "bank.x")]
    pub bank_x: f64,
    #[serde(rename = "bank.r")]
    pub bank_r: f64,
    #[serde(rename = "bank.y")]
    pub bank_y: f64,
    #[serde(rename = "investor.z")]
    pub investor_z: f64,
    #[serde(rename = "investor.c")]
    pub investor_c: f64,
}

impl TryFrom<StateDocument> for MarketState {
    type Error = ModelError;
    fn try_from(d: StateDocument) -> Result<Self> {
        Ok(MarketState {
            bank: BankState {
                x: d.bank_x,
                r: d.bank_r,
                y: d.bank_y,
            },
            investor: InvestorState {
                z: d.investor_z,
                c: d.investor_c,
            },
            price: d.price,
            belief: Belief::new(d.alpha, d.beta)?,
        })
    }
}

impl From<&MarketState> for StateDocument {
    fn from(s: &MarketState) -> Self {
        StateDocument {
            alpha: s.belief.alpha(),
            beta: s.belief.beta(),
            price: s.price,
            bank_x: s.bank.x,
            bank_r: s.bank.r,
            bank_y: s.bank.y,
            investor_z: s.investor.z,
            investor_c: s.investor.c,
        }
    }
}

/// Evaluates both demands at the state's own price and belief. The state is
/// consistent when neither side wants to trade more than `tol_bonds`.
pub fn verify_consistency(s: &MarketState, params: &ModelParams, tol_bonds: f64) -> Result<ConsistencyReport> {
    let bank = demand::bank_demand_capped(&s.bank, &s.belief, params, s.price)?;
    let investor = demand::investor_demand(&s.investor, s.bank.y, &s.belief, params, s.price)?;
    Ok(ConsistencyReport {
        bank_excess: bank.quantity,
        investor_excess: investor.quantity,
        consistent: bank.quantity.abs() <= tol_bonds && investor.quantity.abs() <= tol_bonds,
    })
}

/// Builds a consistent state with `bank_bonds` bonds in the banks' hands.
///
/// The bank sits exactly on its insolvency constraint
/// (`v x + r - y = 0` with `v` the `eps`-quantile), high-powered money splits
/// into reserves and a currency share `mu` of money, and the price is the one
/// at which investors want no trade.
pub fn calibrate(
    belief: Belief,
    params: &ModelParams,
    total_bonds: f64,
    total_hpm: f64,
    bank_bonds: f64,
) -> Result<MarketState> {
    params.validate()?;
    if !(total_bonds > 0.0 && total_hpm > 0.0) {
        return Err(ModelError::NoSolution(format!(
            "totals must be positive (bonds {total_bonds}, high-powered money {total_hpm})"
        )));
    }
    if !(bank_bonds > 0.0 && bank_bonds < total_bonds) {
        return Err(ModelError::NoSolution(format!(
            "bank bonds {bank_bonds} must lie strictly inside (0, {total_bonds})"
        )));
    }
    let mu = params.mu;
    let v = belief.quantile(params.eps)?;
    let x = bank_bonds;
    let z = total_bonds - bank_bonds;
    let money = v * x + total_hpm;
    let y = (1.0 - mu) * money;
    let c = mu * money;
    let r = total_hpm - c;
    if r < 0.0 {
        return Err(ModelError::NoSolution(format!(
            "currency drain {c} exceeds high-powered money {total_hpm}"
        )));
    }
    let mut state = MarketState {
        bank: BankState { x, r, y },
        investor: InvestorState { z, c },
        price: belief.mean(),
        belief,
    };
    let excess = |pi: f64| -> Result<f64> {
        Ok(demand::investor_demand(&state.investor, y, &belief, params, pi)?.quantity)
    };
    // bank demand is zero on (v, E V]; investors must want no trade in there
    let mut lo = v;
    let mut hi = belief.mean();
    if excess(lo * (1.0 + 1e-12))? <= 0.0 {
        return Err(ModelError::NoSolution(format!(
            "investors sell at every price above the bank's quantile {v}"
        )));
    }
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    state.price = 0.5 * (lo + hi);
    Ok(state)
}

/// The worked example's rounded balance sheet: `x = 439`, `r = 168`,
/// `y = 486`, `z = 611`, `c = 54` at price 0.87 under `Beta(20, 2)`.
pub fn example_balance_sheet() -> MarketState {
    MarketState {
        bank: BankState {
            x: 439.0,
            r: 168.0,
            y: 486.0,
        },
        investor: InvestorState { z: 611.0, c: 54.0 },
        price: 0.87,
        belief: Belief::new(20.0, 2.0).expect("valid belief"),
    }
}

/// The worked example's unrounded state: [`calibrate`] with 1050 bonds, 222
/// units of high-powered money and 439 bonds in the banks' hands, under
/// `Beta(20, 2)` and [`ModelParams::example`].
pub fn example_state() -> MarketState {
    let belief = Belief::new(20.0, 2.0).expect("valid belief");
    calibrate(belief, &ModelParams::example(), 1050.0, 222.0, 439.0).expect("example calibrates")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_bank() -> BankState {
        BankState {
            x: 439.0,
            r: 168.0,
            y: 486.0,
        }
    }

    fn table_state() -> MarketState {
        MarketState {
            bank: table_bank(),
            investor: InvestorState { z: 611.0, c: 54.0 },
            price: 0.87,
            belief: Belief::new(20.0, 2.0).unwrap(),
        }
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.01, 0.1, 15.0, 0.0).is_ok());
        assert!(ModelParams::new(0.0, 0.1, 15.0, 0.0).is_err());
        assert!(ModelParams::new(0.01, 1.0, 15.0, 0.0).is_err());
        assert!(ModelParams::new(0.01, 1.5, 15.0, 0.0).is_err());
        assert!(ModelParams::new(0.01, 0.1, 1.0, 0.0).is_err());
        assert!(ModelParams::new(0.01, 0.1, 15.0, 1.2).is_err());
        let json = r#"{"eps":0.01,"mu":0.1,"lambda":15,"gamma_min":0.16,"extra":1}"#;
        assert!(serde_json::from_str::<ModelParams>(json).is_err());
    }

    #[test]
    fn equity_examples() {
        assert!((table_bank().equity(0.87) - 63.93).abs() < 1e-9);
        let b = BankState { x: 0.0, r: 100.0, y: 100.0 };
        assert_eq!(b.equity(0.3), 0.0);
        let b = BankState { x: 10.0, r: 0.0, y: 10.0 };
        assert_eq!(b.equity(0.5), -5.0);
    }

    #[test]
    fn insolvency_price_examples() {
        assert!((table_bank().insolvency_price().unwrap() - 318.0 / 439.0).abs() < 1e-15);
        let rich = BankState { x: 10.0, r: 20.0, y: 5.0 };
        assert_eq!(rich.insolvency_price().unwrap(), 0.0);
        let b = BankState { x: 100.0, r: 0.0, y: 50.0 };
        assert_eq!(b.insolvency_price().unwrap(), 0.5);
        let empty = BankState { x: 0.0, r: 1.0, y: 1.0 };
        assert!(matches!(empty.insolvency_price(), Err(ModelError::Degenerate(_))));
    }

    #[test]
    fn leverage_examples() {
        let l = table_bank().leverage(0.87).unwrap();
        assert!((l - (381.93 + 168.0) / 63.93).abs() < 1e-9);
        assert!((l - 8.6).abs() < 0.05);
        let unlevered = BankState { x: 5.0, r: 3.0, y: 0.0 };
        assert!((unlevered.leverage(0.7).unwrap() - 1.0).abs() < 1e-15);
        let cash = BankState { x: 0.0, r: 100.0, y: 50.0 };
        assert_eq!(cash.leverage(0.5).unwrap(), 2.0);
        let bust = BankState { x: 10.0, r: 0.0, y: 10.0 };
        assert!(matches!(bust.leverage(0.5), Err(ModelError::Insolvent { .. })));
        let bonds_only = table_bank().leverage_with(0.87, LeverageBasis::BondAssets).unwrap();
        assert!(bonds_only < l);
    }

    #[test]
    fn capital_ratio_examples() {
        assert!((table_bank().capital_ratio(0.87).unwrap() - 0.1642).abs() < 0.005);
        let b = BankState { x: 7.0, r: 3.0, y: 3.0 };
        assert!((b.capital_ratio(0.4).unwrap() - 1.0).abs() < 1e-15);
        let b = BankState { x: 100.0, r: 0.0, y: 50.0 };
        assert_eq!(b.capital_ratio(1.0).unwrap(), 0.5);
        let b = BankState { x: 0.0, r: 3.0, y: 3.0 };
        assert!(b.capital_ratio(0.4).is_err());
    }

    #[test]
    fn trade_arithmetic() {
        let s = table_state();
        let t = s.apply_trade(10.0, 0.8, 0.1).unwrap();
        assert!((t.bank.r - s.bank.r + 0.8).abs() < 1e-12);
        assert!((t.bank.y - s.bank.y - 7.2).abs() < 1e-12);
        assert!((t.investor.c - s.investor.c - 0.8).abs() < 1e-12);
        assert!((t.investor.z - s.investor.z + 10.0).abs() < 1e-12);
        assert!((t.money_supply() - s.money_supply() - 8.0).abs() < 1e-12);
        assert_eq!(t.price, 0.8);

        let same = s.apply_trade(0.0, 0.5, 0.1).unwrap();
        assert_eq!(same.bank, s.bank);
        assert_eq!(same.investor, s.investor);
        assert_eq!(same.price, 0.5);

        let t = s.apply_trade(-5.0, 0.5, 0.1).unwrap();
        assert!((t.bank.r - s.bank.r - 0.25).abs() < 1e-12);
        assert!((t.bank.y - s.bank.y + 2.25).abs() < 1e-12);
        assert!((t.investor.c - s.investor.c + 0.25).abs() < 1e-12);
        assert!((t.money_supply() - s.money_supply() + 2.5).abs() < 1e-12);
    }

    #[test]
    fn infeasible_trades_name_the_bound() {
        let s = table_state();
        let err = s.apply_trade(-500.0, 0.5, 0.1).unwrap_err().to_string();
        assert!(err.contains("banks cannot sell"), "{err}");
        let err = s.apply_trade(650.0, 0.9, 0.1).unwrap_err().to_string();
        assert!(err.contains("investors cannot sell"), "{err}");
        let err = s.apply_trade(3000.0, 0.9, 0.9).unwrap_err().to_string();
        assert!(err.contains("reserve"), "{err}");
        let poor = MarketState {
            investor: InvestorState { z: 611.0, c: 1.0 },
            bank: BankState { x: 439.0, r: 168.0, y: 9.0 },
            ..s
        };
        let err = poor.apply_trade(-100.0, 0.5, 0.1).unwrap_err().to_string();
        assert!(err.contains("cannot pay"), "{err}");
    }

    #[test]
    fn state_document_round_trip() {
        let s = table_state();
        let text = s.to_document();
        for key in ["\"alpha\"", "\"bank.x\"", "\"investor.c\"", "\"price\""] {
            assert!(text.contains(key));
        }
        assert_eq!(MarketState::from_document(&text).unwrap(), s);
        assert!(MarketState::from_document("{\"alpha\": 1}").is_err());
    }

    #[test]
    fn validation_catches_bad_states() {
        let p = ModelParams::example();
        let s = table_state();
        s.validate(&p).unwrap();
        let no_bonds = MarketState {
            bank: BankState { x: 0.0, ..s.bank },
            ..s
        };
        assert!(no_bonds.validate(&p).is_err());
        let wrong_share = MarketState {
            investor: InvestorState { c: 80.0, ..s.investor },
            ..s
        };
        assert!(wrong_share.validate(&p).is_err());
        let bust = MarketState { price: 0.5, ..s };
        assert!(bust.validate(&p).is_err());
    }

    #[test]
    fn calibration_reproduces_table() {
        let p = ModelParams::example();
        let s = calibrate(Belief::new(20.0, 2.0).unwrap(), &p, 1050.0, 222.0, 439.0).unwrap();
        assert_eq!(s.bank.x, 439.0);
        assert_eq!(s.investor.z, 611.0);
        assert!((s.price - 0.87).abs() < 0.006, "{}", s.price);
        assert!((s.bank.y - 486.0).abs() < 1.0);
        assert!((s.investor.c - 54.0).abs() < 1.0);
        assert!((s.bank.r - 168.0).abs() < 1.0);
        assert!((s.high_powered_money() - 222.0).abs() < 1e-12);
        assert!((s.investor.c / s.money_supply() - 0.1).abs() < 1e-12);
        s.validate(&p).unwrap();
        let rep = verify_consistency(&s, &p, 1e-4 * 1050.0).unwrap();
        assert!(rep.consistent, "{rep:?}");
        assert!(rep.bank_excess.abs() < 1e-6 && rep.investor_excess.abs() < 1e-6, "{rep:?}");
    }

    #[test]
    fn calibration_without_currency() {
        let p = ModelParams::new(0.01, 0.0, 15.0, 0.0).unwrap();
        let s = calibrate(Belief::new(20.0, 2.0).unwrap(), &p, 1050.0, 222.0, 439.0).unwrap();
        assert_eq!(s.investor.c, 0.0);
        assert_eq!(s.bank.r, 222.0);
    }

    #[test]
    fn calibration_failures() {
        let p = ModelParams::example();
        let b = Belief::new(20.0, 2.0).unwrap();
        assert!(matches!(calibrate(b, &p, 1050.0, 0.0, 439.0), Err(ModelError::NoSolution(_))));
        assert!(matches!(calibrate(b, &p, 1050.0, 222.0, 1050.0), Err(ModelError::NoSolution(_))));
        // reserves cannot cover the currency share
        assert!(matches!(calibrate(b, &p, 1050.0, 10.0, 1000.0), Err(ModelError::NoSolution(_))));
    }
}
