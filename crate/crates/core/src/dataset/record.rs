use alloc::string::String;

use crate::error::{Error, Result};
use crate::signal::SignalVector;

/// Sampling rate of stored records.
pub const RECORD_RATE_HZ: f64 = 125.0;

/// Concurrent ECG, PPG and ABP of one subject.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SubjectRecord {
    subject_id: String,
    ecg_lead: String,
    ecg: SignalVector,
    ppg: SignalVector,
    abp: SignalVector,
}

impl SubjectRecord {
    pub fn new(
        subject_id: impl Into<String>,
        ecg_lead: impl Into<String>,
        ecg: SignalVector,
        ppg: SignalVector,
        abp: SignalVector,
    ) -> Result<Self> {
        let subject_id = subject_id.into();
        if subject_id.is_empty() {
            return Err(Error::InvalidArgument("empty subject id".into()));
        }
        for (name, s) in [("ecg", &ecg), ("ppg", &ppg), ("abp", &abp)] {
            if s.sample_rate_hz() != RECORD_RATE_HZ {
                return Err(Error::InvalidArgument(alloc::format!(
                    "{name} sampled at {} Hz, records are {RECORD_RATE_HZ} Hz",
                    s.sample_rate_hz()
                )));
            }
        }
        if ecg.len() != ppg.len() || ecg.len() != abp.len() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "channel lengths ecg {} ppg {} abp {}",
                ecg.len(),
                ppg.len(),
                abp.len()
            )));
        }
        if ecg.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(Self {
            subject_id,
            ecg_lead: ecg_lead.into(),
            ecg,
            ppg,
            abp,
        })
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn ecg_lead(&self) -> &str {
        &self.ecg_lead
    }

    pub fn ecg(&self) -> &SignalVector {
        &self.ecg
    }

    pub fn ppg(&self) -> &SignalVector {
        &self.ppg
    }

    pub fn abp(&self) -> &SignalVector {
        &self.abp
    }

    pub fn len(&self) -> usize {
        self.ecg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ecg.is_empty()
    }

    /// Same subject with ECG and PPG replaced, e.g. by their denoised versions.
    pub fn with_inputs(&self, ecg: SignalVector, ppg: SignalVector) -> Result<Self> {
        Self::new(self.subject_id.clone(), self.ecg_lead.clone(), ecg, ppg, self.abp.clone())
    }
}
