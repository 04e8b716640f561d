use super::dataset::{Dataset, INTERCEPT};
use super::graph::AdjacencyGraph;
use super::propriety::check_propriety;
use super::spec::ModelSpec;
use super::state::ParamState;
use super::{BetaPrior, ModelError};
use crate::link::LinkSpec;

/// Binomial log-likelihood kernel of one row, binomial coefficient omitted.
/// Terms with a zero count are skipped so that `0 * -inf` never arises.
pub fn row_log_likelihood(y: u32, n: u32, log_cdf: f64, log_sf: f64) -> f64 {
    let mut ll = 0.0;
    if y > 0 {
        ll += y as f64 * log_cdf;
    }
    if n > y {
        ll += (n - y) as f64 * log_sf;
    }
    ll
}

/// `-(1/2) * sum over adjacent unordered pairs of (w_i - w_j)^2`, i.e. the ICAR
/// log density at `tau2 = 1` without its normalising constant.
pub fn icar_exponent(graph: &AdjacencyGraph, w: &[f64]) -> f64 {
    let mut q = 0.0;
    for i in 0..graph.len() {
        for &j in graph.neighbors(i).iter().filter(|&&j| j > i) {
            q += (w[i] - w[j]).powi(2);
        }
    }
    -0.5 * q
}

/// A model specification bound to a dataset (and adjacency graph when the
/// model is spatial).
#[derive(Debug, Clone)]
pub struct Model {
    spec: ModelSpec,
    data: Dataset,
    graph: Option<AdjacencyGraph>,
    row_region: Vec<usize>,
    region_rows: Vec<Vec<usize>>,
    components: Vec<usize>,
    n_components: usize,
    intercept: Option<usize>,
    warnings: Vec<String>,
}

impl Model {
    pub fn new(spec: ModelSpec, data: Dataset, graph: Option<AdjacencyGraph>) -> Result<Self, ModelError> {
        let intercept = data.column(INTERCEPT);
        let mut warnings = Vec::new();
        if matches!(spec.beta_prior(), BetaPrior::Flat) {
            let diag = check_propriety(&data, &spec)?;
            if let Some(reason) = diag.failure() {
                return Err(ModelError::Improper(reason));
            }
        }
        let mut model = Model {
            spec,
            data,
            graph: None,
            row_region: Vec::new(),
            region_rows: Vec::new(),
            components: Vec::new(),
            n_components: 0,
            intercept,
            warnings: Vec::new(),
        };
        if model.spec.spatial().is_none() {
            if graph.is_some() {
                warnings.push("adjacency graph ignored: the model has no spatial component".into());
            }
            model.warnings = warnings;
            return Ok(model);
        }
        let graph = graph.ok_or(ModelError::SpatialSetup("an adjacency graph"))?;
        let regions = model.data.regions().ok_or(ModelError::SpatialSetup("a region column in the data"))?;
        if intercept.is_none() {
            return Err(ModelError::SpatialSetup("an intercept column"));
        }
        let mut row_region = Vec::with_capacity(regions.len());
        let mut region_rows = vec![Vec::new(); graph.len()];
        for (i, label) in regions.iter().enumerate() {
            let k = graph.index_of(label).ok_or_else(|| ModelError::UnknownRegion(label.clone()))?;
            row_region.push(k);
            region_rows[k].push(i);
        }
        let components = graph.components();
        let n_components = components.iter().max().map_or(0, |m| m + 1);
        if n_components > 1 {
            warnings.push(format!(
                "adjacency graph has {n_components} components; spatial effects are centred within each, \
                 and isolated regions keep w = 0"
            ));
        }
        model.graph = Some(graph);
        model.row_region = row_region;
        model.region_rows = region_rows;
        model.components = components;
        model.n_components = n_components;
        model.warnings = warnings;
        Ok(model)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn graph(&self) -> Option<&AdjacencyGraph> {
        self.graph.as_ref()
    }

    pub fn is_spatial(&self) -> bool {
        self.graph.is_some()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn intercept(&self) -> Option<usize> {
        self.intercept
    }

    /// Region index of each row (empty for non-spatial models).
    pub fn row_region(&self) -> &[usize] {
        &self.row_region
    }

    pub fn region_rows(&self, k: usize) -> &[usize] {
        &self.region_rows[k]
    }

    pub fn components(&self) -> &[usize] {
        &self.components
    }

    /// Rank deficiency of the ICAR precision: one per connected component.
    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn n_regions(&self) -> usize {
        self.graph.as_ref().map_or(0, AdjacencyGraph::len)
    }

    /// Column names of a flattened [`ParamState`].
    pub fn param_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.data.names().iter().map(|n| format!("beta[{n}]")).collect();
        names.extend(self.spec.family().shape_params().iter().map(|p| p.name().to_string()));
        if let Some(g) = &self.graph {
            names.extend(g.labels().iter().map(|l| format!("w[{l}]")));
            names.push("tau2".into());
        }
        names
    }

    /// Rebuilds a state from a flattened row (inverse of [`ParamState::values`]).
    pub fn state_from_values(&self, values: &[f64]) -> Result<ParamState, ModelError> {
        let k = self.data.n_covariates();
        let shapes = self.spec.family().shape_params();
        let expected = k + shapes.len() + if self.is_spatial() { self.n_regions() + 1 } else { 0 };
        if values.len() != expected {
            return Err(ModelError::Dimension(format!("{} values, expected {expected}", values.len())));
        }
        let mut link = self.spec.link();
        for (i, &p) in shapes.iter().enumerate() {
            link = link.with_param(p, values[k + i])?;
        }
        let mut state = ParamState::new(values[..k].to_vec(), link);
        if self.is_spatial() {
            let off = k + shapes.len();
            state = state.with_spatial(values[off..off + self.n_regions()].to_vec(), values[expected - 1]);
        }
        Ok(state)
    }

    /// Starting state: zero coefficients, the spec's link, w = 0 and the
    /// configured initial tau2.
    pub fn default_state(&self) -> ParamState {
        let state = ParamState::new(vec![0.0; self.data.n_covariates()], self.spec.link());
        match self.spec.spatial() {
            Some(s) => state.with_spatial(vec![0.0; self.n_regions()], s.tau2_init),
            None => state,
        }
    }

    pub fn check_state(&self, state: &ParamState) -> Result<(), ModelError> {
        if state.beta.len() != self.data.n_covariates() {
            return Err(ModelError::Dimension(format!(
                "{} coefficients for {} design columns",
                state.beta.len(),
                self.data.n_covariates()
            )));
        }
        if state.link.family() != self.spec.family() {
            return Err(ModelError::Dimension(format!("state link {} for a {} model", state.link.family(), self.spec.family())));
        }
        if self.is_spatial() && state.w.len() != self.n_regions() {
            return Err(ModelError::Dimension(format!("{} spatial effects for {} regions", state.w.len(), self.n_regions())));
        }
        Ok(())
    }

    /// Linear predictor of every row, spatial effect included.
    pub fn eta(&self, state: &ParamState) -> Vec<f64> {
        let mut eta = self.data.linear_predictor(&state.beta);
        if self.is_spatial() {
            for (e, &k) in eta.iter_mut().zip(&self.row_region) {
                *e += state.w[k];
            }
        }
        eta
    }

    /// Log-likelihood of each row at the given linear predictors.
    pub fn row_log_likelihoods_at(&self, link: &LinkSpec, eta: &[f64]) -> Vec<f64> {
        let (y, n) = (self.data.y(), self.data.n());
        eta.iter()
            .enumerate()
            .map(|(i, &e)| {
                let (lc, ls) = link.log_cdf_sf(e);
                row_log_likelihood(y[i], n[i], lc, ls)
            })
            .collect()
    }

    /// Log-likelihood summed over rows at the given linear predictors.
    pub fn log_likelihood_at(&self, link: &LinkSpec, eta: &[f64]) -> f64 {
        let (y, n) = (self.data.y(), self.data.n());
        let mut total = 0.0;
        for (i, &e) in eta.iter().enumerate() {
            let (lc, ls) = link.log_cdf_sf(e);
            total += row_log_likelihood(y[i], n[i], lc, ls);
        }
        total
    }

    pub fn row_log_likelihoods(&self, state: &ParamState) -> Vec<f64> {
        self.row_log_likelihoods_at(&state.link, &self.eta(state))
    }

    /// Binomial log-likelihood (binomial coefficients omitted). May be `-inf`,
    /// e.g. when a GEV support endpoint makes an observed outcome impossible.
    pub fn log_likelihood(&self, state: &ParamState) -> Result<f64, ModelError> {
        self.check_state(state)?;
        Ok(self.log_likelihood_at(&state.link, &self.eta(state)))
    }

    /// Log prior of the shape parameters that are sampled.
    pub fn log_shape_prior(&self, link: &LinkSpec) -> f64 {
        self.spec.shape_priors().iter().map(|(&p, prior)| prior.log_density(link.param(p).expect("sampled parameter of the family"))).sum()
    }

    /// ICAR log density of `w` given `tau2`, up to a constant:
    /// `icar_exponent(w) / tau2 - (K - c)/2 * ln tau2` with `c` components.
    pub fn icar_log_density(&self, w: &[f64], tau2: f64) -> f64 {
        match &self.graph {
            Some(g) => {
                let rank = (g.len() - self.n_components) as f64;
                icar_exponent(g, w) / tau2 - 0.5 * rank * tau2.ln()
            }
            None => 0.0,
        }
    }

    pub fn log_prior(&self, state: &ParamState) -> f64 {
        let mut lp = self.spec.beta_prior().log_density(&state.beta) + self.log_shape_prior(&state.link);
        if let Some(s) = self.spec.spatial() {
            lp += self.icar_log_density(&state.w, state.tau2) + s.tau2_prior.log_density(state.tau2);
        }
        lp
    }

    pub fn log_posterior(&self, state: &ParamState) -> Result<f64, ModelError> {
        let ll = self.log_likelihood(state)?;
        Ok(ll + self.log_prior(state))
    }

    /// Re-centres `w` to sum to zero within every graph component and moves the
    /// overall mean into the intercept, leaving connected-graph linear
    /// predictors unchanged.
    pub fn center_spatial(&self, state: &mut ParamState) {
        if !self.is_spatial() {
            return;
        }
        let c = self.n_components;
        let mut sums = vec![0.0; c];
        let mut counts = vec![0usize; c];
        for (k, &comp) in self.components.iter().enumerate() {
            sums[comp] += state.w[k];
            counts[comp] += 1;
        }
        let total: f64 = state.w.iter().sum::<f64>() / state.w.len() as f64;
        for (k, &comp) in self.components.iter().enumerate() {
            state.w[k] -= sums[comp] / counts[comp] as f64;
        }
        // exact zero sum against rounding
        for comp in 0..c {
            let members: Vec<usize> = (0..state.w.len()).filter(|&k| self.components[k] == comp).collect();
            let resid: f64 = members.iter().map(|&k| state.w[k]).sum();
            if let Some(&last) = members.last() {
                state.w[last] -= resid;
            }
        }
        if let Some(j) = self.intercept {
            state.beta[j] += total;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::ShapeParam;
    use crate::model::SpatialSpec;
    use approx::assert_relative_eq;

    fn one_row(y: u32) -> Dataset {
        Dataset::with_intercept(vec![y], vec![1], vec![vec![]], vec![], None).unwrap()
    }

    #[test]
    fn single_row_examples() {
        let m = Model::new(ModelSpec::new(LinkSpec::logit()), one_row(1), None).unwrap();
        let s = ParamState::new(vec![0.0], LinkSpec::logit());
        assert_relative_eq!(m.log_likelihood(&s).unwrap(), 0.5f64.ln(), epsilon = 1e-15);

        let link = LinkSpec::splogit(2.0).unwrap();
        let m = Model::new(ModelSpec::new(link), one_row(0), None).unwrap();
        let s = ParamState::new(vec![0.0], link);
        assert_relative_eq!(m.log_likelihood(&s).unwrap(), 0.5f64.sqrt().ln(), epsilon = 1e-15);
        assert_relative_eq!(m.log_likelihood(&s).unwrap(), (1.0f64 - 0.29289).ln(), epsilon = 1e-5);
    }

    #[test]
    fn duplicated_rows_double() {
        let link = LinkSpec::splogit(0.4).unwrap();
        let one = Dataset::with_intercept(vec![1], vec![3], vec![vec![0.3]], vec!["x".into()], None).unwrap();
        let two = Dataset::with_intercept(vec![1, 1], vec![3, 3], vec![vec![0.3], vec![0.3]], vec!["x".into()], None).unwrap();
        let s = ParamState::new(vec![0.2, -1.1], link);
        let a = Model::new(ModelSpec::new(link), one, None).unwrap().log_likelihood(&s).unwrap();
        let b = Model::new(ModelSpec::new(link), two, None).unwrap().log_likelihood(&s).unwrap();
        assert_eq!(b, 2.0 * a);
    }

    #[test]
    fn flat_prior_posterior_is_likelihood_plus_shape_prior() {
        let data = Dataset::with_intercept(
            vec![0, 1, 1, 0],
            vec![1; 4],
            vec![vec![-1.0], vec![-0.5], vec![0.5], vec![1.0]],
            vec!["x".into()],
            None,
        )
        .unwrap();
        let link = LinkSpec::splogit(1.7).unwrap();
        let spec = ModelSpec::new(link).with_beta_prior(BetaPrior::Flat);
        let m = Model::new(spec, data, None).unwrap();
        let s = ParamState::new(vec![0.1, 0.4], link);
        let diff = m.log_posterior(&s).unwrap() - m.log_likelihood(&s).unwrap();
        assert_relative_eq!(diff, -1.7, epsilon = 1e-14); // exponential(1) at r = 1.7
    }

    #[test]
    fn icar_exponent_on_path() {
        let g = AdjacencyGraph::parse("A B\nB C\n").unwrap();
        assert_eq!(icar_exponent(&g, &[0.0, 0.0, 0.0]), 0.0);
        assert_eq!(icar_exponent(&g, &[1.0, 0.0, -1.0]), -1.0);
        // differences only
        assert_eq!(icar_exponent(&g, &[4.0, 3.0, 2.0]), -1.0);
    }

    #[test]
    fn centering_preserves_linear_predictor() {
        let g = AdjacencyGraph::parse("A B\nB C\n").unwrap();
        let data = Dataset::with_intercept(
            vec![1, 0, 1],
            vec![1, 1, 2],
            vec![vec![0.5], vec![1.0], vec![-0.2]],
            vec!["x".into()],
            Some(vec!["A".into(), "B".into(), "C".into()]),
        )
        .unwrap();
        let spec = ModelSpec::new(LinkSpec::logit()).with_spatial(SpatialSpec::default());
        let m = Model::new(spec, data, Some(g)).unwrap();
        let mut s = m.default_state();
        s.w = vec![1.0, 2.5, -0.25];
        s.beta = vec![0.3, 1.0];
        let before = m.eta(&s);
        let prior_before = m.icar_log_density(&s.w, 1.0);
        m.center_spatial(&mut s);
        assert!(s.w.iter().sum::<f64>().abs() <= 1e-12);
        for (a, b) in before.iter().zip(m.eta(&s)) {
            assert_relative_eq!(*a, b, epsilon = 1e-14);
        }
        assert_relative_eq!(prior_before, m.icar_log_density(&s.w, 1.0), epsilon = 1e-14);
        assert_eq!(m.param_names().last().unwrap(), "tau2");
        let back = m.state_from_values(&s.values(true)).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn spatial_setup_errors() {
        let data = Dataset::with_intercept(vec![1], vec![1], vec![vec![]], vec![], Some(vec!["Z".into()])).unwrap();
        let spec = ModelSpec::new(LinkSpec::logit()).with_spatial(SpatialSpec::default());
        let g = AdjacencyGraph::parse("A B\n").unwrap();
        assert!(matches!(
            Model::new(spec.clone(), data.clone(), Some(g)),
            Err(ModelError::UnknownRegion(r)) if r == "Z"
        ));
        assert!(matches!(Model::new(spec, data, None), Err(ModelError::SpatialSetup(_))));
    }

    #[test]
    fn shape_prior_only_for_sampled() {
        let link = LinkSpec::spt(2.0, 8.0).unwrap();
        let data = one_row(1);
        let spec = ModelSpec::new(link).fix(ShapeParam::Nu);
        let m = Model::new(spec, data, None).unwrap();
        assert_relative_eq!(m.log_shape_prior(&link), -2.0, epsilon = 1e-15);
    }
}
