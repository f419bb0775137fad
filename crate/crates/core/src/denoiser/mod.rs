//! The unrolled GTV denoiser.
//!
//! A run cascades `layers` layers. Each layer builds one similarity graph
//! from its feature map, then runs `blocks_per_layer` blocks; block `b`
//! reweights the graph from the previous estimate and applies the graph
//! filter to the layer input. The first block's estimate is the layer input
//! itself.
//!
//! Color patches share one graph per layer (features come from luma); each
//! channel keeps its own estimate chain.

mod mu_file;

pub use mu_file::{decode_mu, encode_mu, load_mu, write_mu, MuTable, MU_MAGIC, MU_VERSION};

use crate::graph::{
    build_topology, compute_edge_weights, gtv_value, handcrafted_features, l1_laplacian,
    reweight_gamma, FeatureMap, PatchGraph, DEFAULT_EPSILON, DEFAULT_INTENSITY_SCALE,
    DEFAULT_LOCATION_SCALE, DEFAULT_RHO,
};
use crate::imaging::{assemble_patches, extract_patches, ImageBuffer};
use crate::parallel::{map_indexed, Execution};
use crate::spectral::FilterSpec;
use crate::{Error, Patch, Result};

pub const DEFAULT_BLOCKS: usize = 6;
pub const DEFAULT_MU: f64 = 0.5;
pub const DEFAULT_PATCH_SIZE: usize = 36;

/// Where each layer's feature map comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureSource {
    /// Position and intensity of the layer input.
    Handcrafted {
        location_scale: f64,
        intensity_scale: f64,
    },
    /// Image-sized maps, one per layer, or a single map used by every layer.
    Maps(Vec<FeatureMap>),
}

impl Default for FeatureSource {
    fn default() -> Self {
        FeatureSource::Handcrafted {
            location_scale: DEFAULT_LOCATION_SCALE,
            intensity_scale: DEFAULT_INTENSITY_SCALE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MuSource {
    Fixed(f64),
    Table(MuTable),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenoiserConfig {
    pub layers: usize,
    pub blocks_per_layer: usize,
    pub epsilon: f64,
    pub rho: f64,
    /// Filter method and order. Its `mu` is replaced by the per-layer value.
    pub filter: FilterSpec,
    pub features: FeatureSource,
    pub mu: MuSource,
    pub patch_size: usize,
    pub stride: usize,
}

impl Default for DenoiserConfig {
    fn default() -> Self {
        Self {
            layers: 1,
            blocks_per_layer: DEFAULT_BLOCKS,
            epsilon: DEFAULT_EPSILON,
            rho: DEFAULT_RHO,
            filter: FilterSpec::default(),
            features: FeatureSource::default(),
            mu: MuSource::Fixed(DEFAULT_MU),
            patch_size: DEFAULT_PATCH_SIZE,
            stride: DEFAULT_PATCH_SIZE,
        }
    }
}

impl DenoiserConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.blocks_per_layer == 0 {
            return Err(Error::invalid(
                "layers and blocks per layer must be at least 1",
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid("epsilon must be positive"));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::invalid("rho must be positive"));
        }
        self.filter.validate()?;
        if let MuSource::Fixed(mu) = self.mu {
            if !(mu > 0.0 && mu.is_finite()) {
                return Err(Error::invalid(format!("mu must be positive, got {mu}")));
            }
        }
        if let FeatureSource::Maps(maps) = &self.features {
            if maps.len() != 1 && maps.len() != self.layers {
                return Err(Error::invalid(format!(
                    "{} feature maps for {} layers",
                    maps.len(),
                    self.layers
                )));
            }
        }
        if self.patch_size == 0 || self.stride == 0 || self.stride > self.patch_size {
            return Err(Error::invalid("stride must lie in 1..=patch_size"));
        }
        Ok(())
    }
}

/// Graph features and weight for one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerInputs {
    pub features: FeatureMap,
    pub mu: f64,
}

/// Location of a patch within its image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchContext {
    pub index: usize,
    pub origin: (usize, usize),
}

/// Supplies per-layer features and weight for a patch.
pub trait LayerProvider: Sync {
    fn layer_inputs(
        &self,
        layer: usize,
        patch: PatchContext,
        input: &ImageBuffer,
    ) -> Result<LayerInputs>;
}

impl LayerProvider for [LayerInputs] {
    fn layer_inputs(&self, layer: usize, _: PatchContext, _: &ImageBuffer) -> Result<LayerInputs> {
        self.get(layer)
            .cloned()
            .ok_or_else(|| Error::invalid(format!("no inputs for layer {layer}")))
    }
}

/// Provider backed by a config's feature and mu sources.
#[derive(Debug, Clone, Copy)]
pub struct ConfiguredProvider<'a> {
    config: &'a DenoiserConfig,
}

impl<'a> ConfiguredProvider<'a> {
    pub fn new(config: &'a DenoiserConfig) -> Self {
        Self { config }
    }
}

impl LayerProvider for ConfiguredProvider<'_> {
    fn layer_inputs(
        &self,
        layer: usize,
        patch: PatchContext,
        input: &ImageBuffer,
    ) -> Result<LayerInputs> {
        let features = match &self.config.features {
            FeatureSource::Handcrafted {
                location_scale,
                intensity_scale,
            } => handcrafted_features(&input.luminance(), *location_scale, *intensity_scale),
            FeatureSource::Maps(maps) => {
                let map = &maps[layer.min(maps.len() - 1)];
                map.crop(
                    patch.origin.0,
                    patch.origin.1,
                    input.height(),
                    input.width(),
                )?
            }
        };
        let mu = match &self.config.mu {
            MuSource::Fixed(mu) => *mu,
            MuSource::Table(table) => table.get(patch.index, layer, self.config.layers),
        };
        Ok(LayerInputs { features, mu })
    }
}

/// GTV objective `|y - x|^2 + mu * sum w_ij |x_i - x_j|`.
pub fn gtv_objective(graph: &PatchGraph, y: &[f64], x: &[f64], mu: f64) -> Result<f64> {
    let fidelity: f64 = y.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(fidelity + mu * gtv_value(graph, x)?)
}

/// One block: reweight `graph` from `estimate` and filter `y`.
pub fn run_block(
    graph: &PatchGraph,
    estimate: &[f64],
    y: &[f64],
    mu: f64,
    rho: f64,
    filter: &FilterSpec,
) -> Result<Vec<f64>> {
    if estimate.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            actual: estimate.len(),
        });
    }
    let gamma = reweight_gamma(graph, estimate, rho)?;
    let laplacian = l1_laplacian(&gamma)?;
    filter.with_mu(mu).apply(&laplacian, y)
}

/// All block outputs of one layer on a single channel, starting from the
/// estimate `y`.
pub fn run_blocks(
    graph: &PatchGraph,
    y: &[f64],
    mu: f64,
    config: &DenoiserConfig,
) -> Result<Vec<Vec<f64>>> {
    let mut outputs: Vec<Vec<f64>> = Vec::with_capacity(config.blocks_per_layer);
    for _ in 0..config.blocks_per_layer {
        let estimate = outputs.last().map_or(y, Vec::as_slice);
        let next = run_block(graph, estimate, y, mu, config.rho, &config.filter)?;
        outputs.push(next);
    }
    Ok(outputs)
}

/// Weighted graph of a layer.
pub fn layer_graph(
    height: usize,
    width: usize,
    features: &FeatureMap,
    epsilon: f64,
) -> Result<PatchGraph> {
    compute_edge_weights(&build_topology(height, width)?, features, epsilon)
}

/// One layer over every channel of `y`, sharing one graph.
pub fn run_layer(
    y: &ImageBuffer,
    inputs: &LayerInputs,
    config: &DenoiserConfig,
) -> Result<ImageBuffer> {
    if !(inputs.mu > 0.0 && inputs.mu.is_finite()) {
        return Err(Error::invalid(format!(
            "mu must be positive, got {}",
            inputs.mu
        )));
    }
    let graph = layer_graph(y.height(), y.width(), &inputs.features, config.epsilon)?;
    let planes = y
        .planes()
        .iter()
        .map(|plane| {
            let mut outputs = run_blocks(&graph, plane.values(), inputs.mu, config)?;
            plane.with_values(outputs.pop().expect("at least one block"))
        })
        .collect::<Result<Vec<Patch>>>()?;
    ImageBuffer::from_planes(&planes)
}

/// Cascade of layers on one patch, with inputs drawn from `provider`.
pub fn denoise_patch(
    y: &ImageBuffer,
    config: &DenoiserConfig,
    provider: &(impl LayerProvider + ?Sized),
    patch: PatchContext,
) -> Result<ImageBuffer> {
    let mut current = y.clone();
    for layer in 0..config.layers {
        let inputs = provider.layer_inputs(layer, patch, &current)?;
        current = run_layer(&current, &inputs, config)?;
    }
    Ok(current)
}

/// Cascade of layers on `y` treated as a single graph, one input set per layer.
pub fn run_denoiser(
    y: &ImageBuffer,
    config: &DenoiserConfig,
    layer_inputs: &[LayerInputs],
) -> Result<ImageBuffer> {
    if layer_inputs.len() != config.layers {
        return Err(Error::invalid(format!(
            "{} layer inputs for {} layers",
            layer_inputs.len(),
            config.layers
        )));
    }
    let context = PatchContext {
        index: 0,
        origin: (0, 0),
    };
    denoise_patch(y, config, layer_inputs, context)
}

/// Patch-wise denoising of a whole image using the config's sources.
pub fn denoise_image(
    img: &ImageBuffer,
    config: &DenoiserConfig,
    exec: Execution,
) -> Result<ImageBuffer> {
    denoise_image_with(img, config, &ConfiguredProvider::new(config), exec)
}

/// Patch-wise denoising with a custom provider. Patches are processed
/// independently and reassembled in a fixed order.
pub fn denoise_image_with(
    img: &ImageBuffer,
    config: &DenoiserConfig,
    provider: &(impl LayerProvider + ?Sized),
    exec: Execution,
) -> Result<ImageBuffer> {
    config.validate()?;
    let size = config.patch_size.min(img.height()).min(img.width());
    let grid = extract_patches(img, size, config.stride.min(size))?;
    if let MuSource::Table(table) = &config.mu {
        table.check_layout(grid.len(), config.layers)?;
    }
    if let FeatureSource::Maps(maps) = &config.features {
        if let Some(m) = maps
            .iter()
            .find(|m| m.height() != img.height() || m.width() != img.width())
        {
            return Err(Error::invalid(format!(
                "feature map is {}x{}, image is {}x{}",
                m.height(),
                m.width(),
                img.height(),
                img.width()
            )));
        }
    }
    let outputs = map_indexed(exec, &grid.patches, |index, patch| {
        let context = PatchContext {
            index,
            origin: grid.origins[index],
        };
        denoise_patch(patch, config, provider, context)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    assemble_patches(&grid, &outputs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::FilterMethod;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn random_image(seed: u64, h: usize, w: usize, ch: usize) -> ImageBuffer {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ImageBuffer::new(h, w, ch, (0..h * w * ch).map(|_| rng.random()).collect()).unwrap()
    }

    fn handcrafted_inputs(y: &ImageBuffer, mu: f64) -> LayerInputs {
        LayerInputs {
            features: handcrafted_features(&y.luminance(), 0.1, 1.0),
            mu,
        }
    }

    #[test]
    fn constant_input_is_a_fixed_point() {
        let y = ImageBuffer::filled(8, 8, 1, 0.4).unwrap();
        for method in FilterMethod::ALL {
            let config = DenoiserConfig {
                // flat estimates give gamma = w / rho, so the Chebyshev
                // interval is wide and needs a high order
                filter: FilterSpec::new(0.5, method).unwrap().with_order(
                    if method == FilterMethod::Chebyshev {
                        400
                    } else {
                        20
                    },
                ),
                layers: 2,
                ..DenoiserConfig::default()
            };
            let inputs = vec![handcrafted_inputs(&y, 0.5), handcrafted_inputs(&y, 0.7)];
            let out = run_denoiser(&y, &config, &inputs).unwrap();
            let tol = if method == FilterMethod::Chebyshev {
                1e-3
            } else {
                1e-9
            };
            assert!(
                out.samples().iter().all(|v| (v - 0.4).abs() <= tol),
                "{method}"
            );
        }
    }

    #[test]
    fn two_node_block_matches_hand_inverse() {
        // w = 1, estimate (0, 0.5), rho 0.01 -> gamma = 2; (I + L) with mu = 1
        // is [[3, -2], [-2, 3]], inverse [[3, 2], [2, 3]] / 5
        let graph = layer_graph(
            1,
            2,
            &FeatureMap::new(1, 2, 1, vec![0.0, 0.0]).unwrap(),
            0.3,
        )
        .unwrap();
        let spec = FilterSpec::new(1.0, FilterMethod::ExactEig).unwrap();
        let x = run_block(&graph, &[0.0, 0.5], &[0.0, 5.0], 1.0, 0.01, &spec).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn more_mu_smooths_more() {
        let y = random_image(1, 12, 12, 1);
        let graph = layer_graph(12, 12, &handcrafted_features(&y.plane(0), 0.1, 1.0), 0.3).unwrap();
        let spec = FilterSpec::default();
        let mut prev = 0.0;
        for mu in [0.1, 1.0, 10.0] {
            let x = run_block(&graph, y.samples(), y.samples(), mu, 0.01, &spec).unwrap();
            let dist: f64 = x
                .iter()
                .zip(y.samples())
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(dist >= prev);
            prev = dist;
        }
    }

    #[test]
    fn single_block_layer_is_run_block() {
        let y = random_image(2, 9, 9, 1);
        let config = DenoiserConfig {
            blocks_per_layer: 1,
            ..DenoiserConfig::default()
        };
        let inputs = handcrafted_inputs(&y, 0.5);
        let layer = run_layer(&y, &inputs, &config).unwrap();
        let graph = layer_graph(9, 9, &inputs.features, 0.3).unwrap();
        let block = run_block(&graph, y.samples(), y.samples(), 0.5, 0.01, &config.filter).unwrap();
        assert_eq!(layer.samples(), block.as_slice());
    }

    #[test]
    fn one_layer_denoiser_is_run_layer() {
        let y = random_image(3, 10, 10, 1);
        let config = DenoiserConfig::default();
        let inputs = handcrafted_inputs(&y, 0.5);
        let a = run_denoiser(&y, &config, std::slice::from_ref(&inputs)).unwrap();
        let b = run_layer(&y, &inputs, &config).unwrap();
        assert_eq!(a, b);
        assert!(run_denoiser(&y, &config, &[]).is_err());
    }

    #[test]
    fn channels_are_filtered_independently() {
        let y = random_image(4, 10, 10, 3);
        let config = DenoiserConfig::default();
        let inputs = handcrafted_inputs(&y, 0.5);
        let joint = run_layer(&y, &inputs, &config).unwrap();
        for c in 0..3 {
            let single = run_layer(&ImageBuffer::gray(&y.plane(c)), &inputs, &config).unwrap();
            assert_eq!(joint.plane(c).values(), single.samples());
        }
    }

    #[test]
    fn vanishing_mu_is_identity() {
        let y = random_image(5, 72, 72, 1);
        for (layers, blocks) in [(1, 1), (2, 6)] {
            let config = DenoiserConfig {
                layers,
                blocks_per_layer: blocks,
                mu: MuSource::Fixed(1e-15),
                ..DenoiserConfig::default()
            };
            let out = denoise_image(&y, &config, Execution::Sequential).unwrap();
            for (a, b) in out.samples().iter().zip(y.samples()) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    struct CountingProvider<'a> {
        inner: ConfiguredProvider<'a>,
        calls: AtomicUsize,
    }

    impl LayerProvider for CountingProvider<'_> {
        fn layer_inputs(
            &self,
            layer: usize,
            patch: PatchContext,
            input: &ImageBuffer,
        ) -> Result<LayerInputs> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            self.inner.layer_inputs(layer, patch, input)
        }
    }

    #[test]
    fn one_graph_per_layer_per_patch() {
        let y = random_image(6, 72, 72, 1);
        let config = DenoiserConfig {
            layers: 2,
            ..DenoiserConfig::default()
        };
        let provider = CountingProvider {
            inner: ConfiguredProvider::new(&config),
            calls: AtomicUsize::new(0),
        };
        denoise_image_with(&y, &config, &provider, Execution::Parallel).unwrap();
        assert_eq!(provider.calls.load(Ordering::SeqCst), 4 * 2);
    }

    #[test]
    fn execution_modes_are_bit_identical() {
        let y = random_image(7, 80, 76, 3);
        let config = DenoiserConfig {
            stride: 20,
            ..DenoiserConfig::default()
        };
        let a = denoise_image(&y, &config, Execution::Sequential).unwrap();
        let b = crate::parallel::with_threads(3, || {
            denoise_image(&y, &config, Execution::Parallel).unwrap()
        });
        assert_eq!(a, b);
        assert!(a.samples().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn mu_table_and_feature_maps_are_checked() {
        let y = random_image(8, 72, 72, 1);
        let bad_mu = DenoiserConfig {
            mu: MuSource::Table(MuTable::new(vec![0.5, 0.5, 0.5]).unwrap()),
            ..DenoiserConfig::default()
        };
        assert!(denoise_image(&y, &bad_mu, Execution::Sequential).is_err());
        let per_patch = DenoiserConfig {
            mu: MuSource::Table(MuTable::new(vec![0.5, 0.1, 0.2, 0.3]).unwrap()),
            ..DenoiserConfig::default()
        };
        assert!(denoise_image(&y, &per_patch, Execution::Sequential).is_ok());

        let wrong_map = DenoiserConfig {
            features: FeatureSource::Maps(vec![
                FeatureMap::new(36, 36, 3, vec![0.0; 36 * 36 * 3]).unwrap()
            ]),
            ..DenoiserConfig::default()
        };
        assert!(denoise_image(&y, &wrong_map, Execution::Sequential).is_err());
    }

    #[test]
    fn file_features_equal_handcrafted_for_one_layer() {
        let y = random_image(9, 72, 72, 1);
        let full = handcrafted_features(&y.plane(0), 0.0, 1.0);
        let from_map = DenoiserConfig {
            features: FeatureSource::Maps(vec![full]),
            ..DenoiserConfig::default()
        };
        let handcrafted = DenoiserConfig {
            features: FeatureSource::Handcrafted {
                location_scale: 0.0,
                intensity_scale: 1.0,
            },
            ..DenoiserConfig::default()
        };
        let a = denoise_image(&y, &from_map, Execution::Sequential).unwrap();
        let b = denoise_image(&y, &handcrafted, Execution::Sequential).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_validation() {
        let mut c = DenoiserConfig::default();
        assert!(c.validate().is_ok());
        c.layers = 0;
        assert!(c.validate().is_err());
        let c = DenoiserConfig {
            stride: 40,
            ..DenoiserConfig::default()
        };
        assert!(c.validate().is_err());
        let c = DenoiserConfig {
            mu: MuSource::Fixed(0.0),
            ..DenoiserConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
