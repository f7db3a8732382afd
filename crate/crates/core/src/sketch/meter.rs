//! Word-level space accounting (one word = 8 bytes).

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpaceMeter {
    current: usize,
    peak: usize,
    phases: Vec<(String, usize)>,
}

impl SpaceMeter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn alloc(&mut self, words: usize) {
        self.current += words;
        self.peak = self.peak.max(self.current);
    }

    pub fn free(&mut self, words: usize) {
        debug_assert!(words <= self.current, "freeing more words than allocated");
        self.current = self.current.saturating_sub(words);
    }

    /// Replace the current count, e.g. after recomputing a structure's size.
    pub fn set(&mut self, words: usize) {
        self.current = words;
        self.peak = self.peak.max(words);
    }

    pub fn current(&self) -> usize {
        self.current
    }

    pub fn peak(&self) -> usize {
        self.peak
    }

    /// Record the peak so far under `name`.
    pub fn mark_phase(&mut self, name: &str) {
        self.phases.push((name.to_string(), self.peak));
    }

    pub fn phases(&self) -> &[(String, usize)] {
        &self.phases
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut body = String::from("phase,words_peak\n");
        for (name, words) in &self.phases {
            body.push_str(&format!("{name},{words}\n"));
        }
        f.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))
    }
}
