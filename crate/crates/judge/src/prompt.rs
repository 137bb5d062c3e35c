use std::collections::HashMap;
use std::path::PathBuf;

use base64::Engine;
use graphsim_harness::Trial;
use sha2::{Digest, Sha256};

use crate::JudgeError;

/// The task prompt, sent unchanged with every trial.
pub const PROMPT: &str = include_str!("prompt.txt");
pub const PROMPT_SHA256: &str = "09830efef54c4ecb11cf80b4e8c5a5d8db653bb01fddc3f2b248b37384fb984a";
/// Follow-up sent once when a reply cannot be parsed.
pub const REPAIR_NOTE: &str =
    "Your previous reply could not be parsed. Reply again with only the single JSON object described in the Final Output Format.";
pub const MAX_IMAGE_SIDE: u32 = 512;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageAttachment {
    /// `Q`, `T1` or `T2`.
    pub label: &'static str,
    pub stimulus_id: String,
    pub png: Vec<u8>,
    pub sha256: String,
}

impl ImageAttachment {
    pub fn base64(&self) -> String {
        base64::engine::general_purpose::STANDARD.encode(&self.png)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptBundle {
    pub trial_id: String,
    pub triplet_id: String,
    pub prompt: &'static str,
    pub images: [ImageAttachment; 3],
    /// Earlier unparseable reply, present on the repair attempt.
    pub repair_of: Option<String>,
}

impl PromptBundle {
    pub fn prompt_sha256(&self) -> String {
        sha256_hex(self.prompt.as_bytes())
    }

    pub fn image_hashes(&self) -> Vec<String> {
        self.images.iter().map(|i| i.sha256.clone()).collect()
    }

    pub fn with_repair(&self, previous: &str) -> PromptBundle {
        PromptBundle { repair_of: Some(previous.to_string()), ..self.clone() }
    }
}

/// Model-ready PNGs. Targets may be stored per triplet (after rotation alignment),
/// so lookups carry the triplet id.
pub trait ImageSource: Sync {
    fn image(&self, triplet_id: &str, stimulus_id: &str) -> Option<Vec<u8>>;
}

impl ImageSource for HashMap<String, Vec<u8>> {
    fn image(&self, _triplet_id: &str, stimulus_id: &str) -> Option<Vec<u8>> {
        self.get(stimulus_id).cloned()
    }
}

/// Reads `<root>/<triplet_id>/<stimulus_id>.png`, falling back to `<root>/<stimulus_id>.png`.
#[derive(Debug, Clone)]
pub struct DirImages {
    pub root: PathBuf,
}

impl ImageSource for DirImages {
    fn image(&self, triplet_id: &str, stimulus_id: &str) -> Option<Vec<u8>> {
        let file = format!("{stimulus_id}.png");
        std::fs::read(self.root.join(triplet_id).join(&file)).or_else(|_| std::fs::read(self.root.join(&file))).ok()
    }
}

/// Width and height from a PNG header.
pub fn png_dimensions(png: &[u8]) -> Option<(u32, u32)> {
    const SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];
    if png.len() < 24 || png[..8] != SIGNATURE || &png[12..16] != b"IHDR" {
        return None;
    }
    let be = |b: &[u8]| u32::from_be_bytes([b[0], b[1], b[2], b[3]]);
    Some((be(&png[16..20]), be(&png[20..24])))
}

/// Attaches Q, then the left target as T1 and the right target as T2.
pub fn build_prompt(trial: &Trial, images: &dyn ImageSource) -> Result<PromptBundle, JudgeError> {
    let t = &trial.triplet;
    let slots = [("Q", &t.query_id), ("T1", &trial.placement.left_id), ("T2", &trial.placement.right_id)];
    let attach = |(label, id): (&'static str, &String)| -> Result<ImageAttachment, JudgeError> {
        let png = images
            .image(&t.triplet_id, id)
            .ok_or_else(|| JudgeError::MissingImage { trial_id: trial.trial_id.clone(), stimulus_id: id.clone() })?;
        let (w, h) = png_dimensions(&png).ok_or_else(|| JudgeError::InvalidImage(id.clone()))?;
        if w > MAX_IMAGE_SIDE || h > MAX_IMAGE_SIDE {
            return Err(JudgeError::ImageTooLarge { stimulus_id: id.clone(), width: w, height: h });
        }
        Ok(ImageAttachment { label, stimulus_id: id.clone(), sha256: sha256_hex(&png), png })
    };
    let [q, t1, t2] = slots;
    Ok(PromptBundle {
        trial_id: trial.trial_id.clone(),
        triplet_id: t.triplet_id.clone(),
        prompt: PROMPT,
        images: [attach(q)?, attach(t1)?, attach(t2)?],
        repair_of: None,
    })
}
