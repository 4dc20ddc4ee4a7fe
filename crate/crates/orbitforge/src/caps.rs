/// Resource budgets for the exhaustive oracle paths. Every cap is explicit
/// and overridable; exceeding one yields an error, never a wrong answer.
#[derive(Debug, Clone)]
pub struct Caps {
    /// Maximum number of group elements materialized by closure.
    pub order_cap: u64,
    /// Maximum number of tuple/subset visits in brute-force orbit counting.
    pub work_cap: u64,
    /// Maximum degree for invariant-partition enumeration.
    pub partition_degree_cap: usize,
    /// Maximum index [ambient : base] in subgroup-lattice enumeration.
    pub subgroup_index_cap: u64,
    /// Maximum number of orbits accepted by the unary reduct enumerator.
    pub reduct_orbit_cap: usize,
    /// Maximum total fiber size Σ|F_i| in covering-reduct enumeration.
    pub fiber_sum_cap: usize,
    /// Maximum order ∏|F_i|! in covering-reduct enumeration.
    pub fiber_order_cap: u64,
    /// Maximum n for exhaustive set-partition generation (p_k oracle).
    pub bruteforce_cap: usize,
    /// Maximum n for symbolic orbit counting.
    pub symbolic_n_cap: usize,
    /// Denominator bound for the rational constant search in `find_upper_c`.
    pub denominator_cap: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            order_cap: 1_000_000,
            work_cap: 1_000_000_000,
            partition_degree_cap: 12,
            subgroup_index_cap: 10_000,
            reduct_orbit_cap: 6,
            fiber_sum_cap: 8,
            fiber_order_cap: 10_000,
            bruteforce_cap: 13,
            symbolic_n_cap: 8,
            denominator_cap: 64,
        }
    }
}

impl Caps {
    /// Apply a `key=value` override; unknown keys are rejected so typos in
    /// `ORBITFORGE_CAPS` or `--work-cap`-style flags surface immediately.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let parse_u64 = |v: &str| {
            v.parse::<u64>()
                .map_err(|e| format!("bad value {v:?}: {e}"))
        };
        let parse_usize = |v: &str| {
            v.parse::<usize>()
                .map_err(|e| format!("bad value {v:?}: {e}"))
        };
        match key {
            "order_cap" => self.order_cap = parse_u64(value)?,
            "work_cap" => self.work_cap = parse_u64(value)?,
            "partition_degree_cap" => self.partition_degree_cap = parse_usize(value)?,
            "subgroup_index_cap" => self.subgroup_index_cap = parse_u64(value)?,
            "reduct_orbit_cap" => self.reduct_orbit_cap = parse_usize(value)?,
            "fiber_sum_cap" => self.fiber_sum_cap = parse_usize(value)?,
            "fiber_order_cap" => self.fiber_order_cap = parse_u64(value)?,
            "bruteforce_cap" => self.bruteforce_cap = parse_usize(value)?,
            "symbolic_n_cap" => self.symbolic_n_cap = parse_usize(value)?,
            "denominator_cap" => self.denominator_cap = parse_u64(value)?,
            other => return Err(format!("unknown cap key {other:?}")),
        }
        Ok(())
    }
}
