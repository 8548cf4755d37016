use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::client::{first_line, CaptionClient, CaptionRequest, ImageClient, ImageRequest};
use super::prompt::{build_prompt, PromptTemplate};
use super::validate::{validate_negative, NegativeStatus, RejectReason, ValidationLimits};
use crate::error::{Error, Result};
use crate::plant::{Category, SelectionMode, SelectionRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ImageParams {
    pub strength: f64,
    pub steps: u32,
}

impl Default for ImageParams {
    fn default() -> Self {
        Self { strength: 0.9, steps: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationClientConfig {
    pub endpoint: Option<String>,
    pub timeout_ms: u64,
    pub max_retries: usize,
    pub max_concurrent: usize,
    pub image_params: ImageParams,
    pub limits: ValidationLimits,
}

impl Default for GenerationClientConfig {
    fn default() -> Self {
        Self {
            endpoint: None,
            timeout_ms: 30_000,
            max_retries: 2,
            max_concurrent: 4,
            image_params: ImageParams::default(),
            limits: ValidationLimits::default(),
        }
    }
}

impl GenerationClientConfig {
    pub fn validate(&self) -> Result<()> {
        let s = self.image_params.strength;
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::InvalidConfig(format!("strength {s} outside (0, 1]")));
        }
        if self.max_concurrent == 0 {
            return Err(Error::InvalidConfig("max_concurrent must be >= 1".into()));
        }
        if self.timeout_ms == 0 {
            return Err(Error::InvalidConfig("timeout must be positive".into()));
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let cfg: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativeRecord {
    pub id: String,
    pub anchor_caption: String,
    pub keyword: String,
    pub category: Category,
    pub concreteness: f64,
    pub negative_caption: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negative_image_ref: Option<String>,
    pub status: NegativeStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<SelectionMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_ref: Option<String>,
}

/// Asks the captioner until a response validates or the retry budget runs
/// out. Returns the last response seen and the final status.
pub fn caption_negative(
    record: &SelectionRecord,
    template: &PromptTemplate,
    client: &dyn CaptionClient,
    cfg: &GenerationClientConfig,
) -> Result<(String, NegativeStatus)> {
    let prompt = build_prompt(record, template)?;
    let request = CaptionRequest {
        prompt: &prompt,
        caption: &record.anchor_caption,
        keyword: &record.keyword,
        category: record.category,
    };
    let mut last = (String::new(), NegativeStatus::Rejected(RejectReason::Retries));
    for _ in 0..=cfg.max_retries {
        let text = match client.complete(&request).and_then(|t| first_line(&t)) {
            Ok(t) => t,
            Err(Error::MalformedResponse(_)) => {
                last.1 = NegativeStatus::Rejected(RejectReason::Malformed);
                continue;
            }
            Err(_) => {
                last.1 = NegativeStatus::Rejected(RejectReason::Retries);
                continue;
            }
        };
        let status = validate_negative(&record.anchor_caption, &text, &record.keyword, &cfg.limits);
        last = (text, status);
        if status == NegativeStatus::Ok {
            break;
        }
    }
    Ok(last)
}

pub fn image_negative(
    record: &NegativeRecord,
    client: &dyn ImageClient,
    params: &ImageParams,
) -> Result<String> {
    let anchor = record.image_ref.as_ref().filter(|_| record.status.is_accepted());
    let Some(anchor) = anchor else {
        return Err(Error::SkippedRecord(record.id.clone()));
    };
    client.edit(&ImageRequest {
        image_ref: anchor.clone(),
        caption: record.negative_caption.clone(),
        strength: params.strength,
        steps: params.steps,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub total: usize,
    pub ok: usize,
    pub pending_image: usize,
    pub rejected: BTreeMap<String, usize>,
}

fn process_one(
    sel: &SelectionRecord,
    template: &PromptTemplate,
    captioner: &dyn CaptionClient,
    imager: Option<&dyn ImageClient>,
    cfg: &GenerationClientConfig,
) -> Result<NegativeRecord> {
    let (negative_caption, status) = caption_negative(sel, template, captioner, cfg)?;
    let mut rec = NegativeRecord {
        id: sel.id.clone(),
        anchor_caption: sel.anchor_caption.clone(),
        keyword: sel.keyword.clone(),
        category: sel.category,
        concreteness: sel.concreteness,
        negative_caption,
        negative_image_ref: None,
        status,
        mode: Some(sel.mode),
        image_ref: sel.image_ref.clone(),
    };
    if rec.status != NegativeStatus::Ok {
        return Ok(rec);
    }
    match (imager, rec.image_ref.is_some()) {
        (Some(client), true) => {
            let mut result = Err(Error::RetriesExhausted(0));
            for _ in 0..=cfg.max_retries {
                result = image_negative(&rec, client, &cfg.image_params);
                if result.is_ok() {
                    break;
                }
            }
            match result {
                Ok(r) => rec.negative_image_ref = Some(r),
                Err(_) => rec.status = NegativeStatus::Rejected(RejectReason::Retries),
            }
        }
        _ => rec.status = NegativeStatus::PendingImage,
    }
    Ok(rec)
}

/// Runs every selection through captioning, validation and image editing
/// with up to `max_concurrent` workers. Accepted records come back in input
/// order; rejected ones are only counted.
pub fn run_pipeline(
    selections: &[SelectionRecord],
    template: &PromptTemplate,
    captioner: &dyn CaptionClient,
    imager: Option<&dyn ImageClient>,
    cfg: &GenerationClientConfig,
) -> Result<(Vec<NegativeRecord>, RunReport)> {
    cfg.validate()?;
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<NegativeRecord>>>> =
        selections.iter().map(|_| Mutex::new(None)).collect();
    let workers = cfg.max_concurrent.min(selections.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(sel) = selections.get(i) else { break };
                let out = process_one(sel, template, captioner, imager, cfg);
                *slots[i].lock().unwrap_or_else(|e| e.into_inner()) = Some(out);
            });
        }
    });

    let mut report = RunReport { total: selections.len(), ..Default::default() };
    let mut kept = Vec::new();
    for slot in slots {
        let rec = slot
            .into_inner()
            .unwrap_or_else(|e| e.into_inner())
            .expect("every index is processed")?;
        match rec.status {
            NegativeStatus::Ok => report.ok += 1,
            NegativeStatus::PendingImage => report.pending_image += 1,
            NegativeStatus::Rejected(r) => {
                *report.rejected.entry(r.as_str().to_string()).or_default() += 1;
                continue;
            }
        }
        kept.push(rec);
    }
    Ok((kept, report))
}
