//! Enumeration limits shared by the brute-force routines.

/// Environment variable overriding every default budget.
pub const BUDGET_ENV: &str = "MDPLOOK_BUDGET";

pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// Budget for exhaustive expected-maximum expansion in the gadget module.
pub const DEFAULT_SUBSET_EXPANSION_BUDGET: u64 = 10_000_000;

/// `MDPLOOK_BUDGET` if set and parseable, else `default`.
pub fn budget_or(default: u64) -> u64 {
    std::env::var(BUDGET_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(default)
}

pub fn default_budget() -> u64 {
    budget_or(DEFAULT_BUDGET)
}

/// `base^exp`, saturating at `u64::MAX`.
pub fn saturating_pow(base: u64, exp: u64) -> u64 {
    let mut acc: u64 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
        if acc == u64::MAX {
            break;
        }
    }
    acc
}
