use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::plant::{SelectionMode, SelectionRecord};

const PLACEHOLDER: &str = "{}";
const DEFAULT_INSTRUCTION: &str = include_str!("../../data/prompt_template.txt");
const DEFAULT_BLOCKS: [(&str, &str); 4] = [
    ("attribute", include_str!("../../data/examples/attribute.txt")),
    ("relation", include_str!("../../data/examples/relation.txt")),
    ("object", include_str!("../../data/examples/object.txt")),
    ("unconstrained", include_str!("../../data/examples/unconstrained.txt")),
];

/// Block used for records selected without regard to concreteness.
pub const UNCONSTRAINED_BLOCK: &str = "unconstrained";

/// Instruction text with three `{}` slots (examples, input, keyword) and one
/// in-context example block per category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub instruction_block: String,
    pub example_blocks: BTreeMap<String, String>,
}

impl Default for PromptTemplate {
    fn default() -> Self {
        Self {
            instruction_block: DEFAULT_INSTRUCTION.to_string(),
            example_blocks: DEFAULT_BLOCKS
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }
}

impl PromptTemplate {
    pub fn new(instruction_block: String, example_blocks: BTreeMap<String, String>) -> Result<Self> {
        let slots = instruction_block.matches(PLACEHOLDER).count();
        if slots != 3 {
            return Err(Error::InvalidConfig(format!(
                "prompt template needs 3 `{{}}` slots, found {slots}"
            )));
        }
        Ok(Self { instruction_block, example_blocks })
    }

    /// Reads `prompt_template.txt` and `examples/<category>.txt` from `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let instruction = std::fs::read_to_string(dir.join("prompt_template.txt"))?;
        let mut blocks = BTreeMap::new();
        for entry in std::fs::read_dir(dir.join("examples"))? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) == Some("txt") {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    blocks.insert(stem.to_string(), std::fs::read_to_string(&path)?);
                }
            }
        }
        Self::new(instruction, blocks)
    }

    pub fn render(&self, examples: &str, input: &str, keyword: &str) -> String {
        let mut out = String::with_capacity(self.instruction_block.len() + examples.len() + 128);
        let mut parts = self.instruction_block.splitn(4, PLACEHOLDER);
        let fills = [examples, input, keyword];
        out.push_str(parts.next().unwrap_or_default());
        for (fill, rest) in fills.iter().zip(parts) {
            out.push_str(fill);
            out.push_str(rest);
        }
        out
    }

    pub fn block_key(record: &SelectionRecord) -> String {
        match record.mode {
            SelectionMode::Random => UNCONSTRAINED_BLOCK.to_string(),
            _ => record.category.to_string(),
        }
    }
}

pub fn build_prompt(record: &SelectionRecord, template: &PromptTemplate) -> Result<String> {
    let key = PromptTemplate::block_key(record);
    let block = template
        .example_blocks
        .get(&key)
        .ok_or(Error::UnknownCategory(key))?;
    Ok(template.render(block, &record.anchor_caption, &record.keyword))
}
