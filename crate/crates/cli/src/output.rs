use clap::ValueEnum;
use serde_json::Value;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// What a subcommand prints, and whether its verdict is positive.
pub struct Report {
    pub passed: bool,
    pub text: String,
    pub json: Value,
}

impl Report {
    pub fn new(passed: bool, text: String, json: Value) -> Self {
        Report { passed, text, json }
    }

    pub fn ok(text: String, json: Value) -> Self {
        Report::new(true, text, json)
    }

    pub fn fail(text: String, json: Value) -> Self {
        Report::new(false, text, json)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text.clone(),
            Format::Json => {
                let mut v = self.json.clone();
                if let Value::Object(m) = &mut v {
                    m.entry("passed").or_insert(Value::Bool(self.passed));
                }
                format!(
                    "{}\n",
                    serde_json::to_string_pretty(&v).expect("reports serialize")
                )
            }
        }
    }
}
