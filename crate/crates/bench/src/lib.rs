//! Shared fixtures for the criterion benchmarks: a mid-size synthetic
//! corpus and the models trained from it, built once per process.

use shapespace::align::gpa;
use shapespace::model::{train_global, train_local, GlobalPcaModel, LocalWaveletModel};
use shapespace::synth::{generate_corpus, Corpus, SynthSpec};
use shapespace::wavelet::SubdivisionHierarchy;

pub struct Fixture {
    pub corpus: Corpus,
    pub hierarchy: SubdivisionHierarchy,
    pub global: GlobalPcaModel,
    pub local: LocalWaveletModel,
}

/// 17x25 grid, 20 shapes, both models trained on the aligned corpus.
pub fn fixture() -> Fixture {
    let spec = SynthSpec::small();
    let corpus = generate_corpus(&spec).expect("valid built-in spec");
    let hierarchy = corpus.hierarchy;
    let aligned = gpa(&corpus.shapes, 100, 1e-10).expect("corpus aligns");
    let training = aligned.training_set();
    let global = train_global(&training, None).expect("corpus trains");
    let local = train_local(&training, &hierarchy).expect("corpus trains");
    Fixture {
        corpus,
        hierarchy,
        global,
        local,
    }
}
