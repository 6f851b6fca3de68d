#![allow(dead_code)]

use survmix_core::{calibrate, CalibratedDesign, DesignSpec, SummaryInputs, SummaryPayload, SurvivalLaw};

/// Neoadjuvant trastuzumab design: five-year survival rates by response.
pub fn noah_inputs() -> SummaryInputs {
    SummaryInputs {
        p0: 0.19,
        delta_p: 0.19,
        tau: 5.0,
        censor_scale: 7.0,
        censor_scale_treatment: None,
        shape: 1.0,
        payload: SummaryPayload::Rates {
            s0_r: 0.55,
            s0_nr: 0.41,
            diffs_r: 0.32,
            diffs_nr: 0.0,
        },
    }
}

pub fn noah() -> CalibratedDesign {
    calibrate(&noah_inputs()).unwrap()
}

pub fn noah_spec() -> DesignSpec {
    DesignSpec::new(5.0, 0.05, 0.2, 0.5, SurvivalLaw::exponential(7.0).unwrap()).unwrap()
}
