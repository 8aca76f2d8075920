//! Line-oriented interactive loop over any reader/writer pair.

use std::io::{self, BufRead, Write};

use speakable::demo::Home;
use speakable::{execute_call, explain, resolve, Registry, ResolutionResult, ResolvedCall};

pub const PROMPT: &str = "> ";

#[derive(Debug, Clone, Copy, Default)]
pub struct ReplOptions {
    pub show_scores: bool,
    pub prompt: bool,
}

pub struct Repl<'a> {
    registry: &'a Registry,
    home: Option<&'a Home>,
    options: ReplOptions,
    /// Options offered by the last ambiguous sentence, if any.
    pending: Vec<ResolvedCall>,
}

impl<'a> Repl<'a> {
    pub fn new(registry: &'a Registry, options: ReplOptions) -> Self {
        Repl {
            registry,
            home: None,
            options,
            pending: Vec::new(),
        }
    }

    /// Enables `:state`.
    pub fn with_home(mut self, home: &'a Home) -> Self {
        self.home = Some(home);
        self
    }

    /// Run until `:quit` or end of input.
    pub fn run<R: BufRead, W: Write>(&mut self, input: R, mut out: W) -> io::Result<()> {
        let mut lines = input.lines();
        loop {
            if self.options.prompt {
                write!(out, "{PROMPT}")?;
                out.flush()?;
            }
            let Some(line) = lines.next() else { break };
            let line = match line {
                Ok(line) => line,
                // Undecodable input is reported and skipped, never fatal.
                Err(e) if e.kind() == io::ErrorKind::InvalidData => {
                    writeln!(out, "error: {e}")?;
                    continue;
                }
                Err(e) => return Err(e),
            };
            if !self.handle_line(&line, &mut out)? {
                break;
            }
        }
        Ok(())
    }

    /// Process one line; returns false when the session should end.
    pub fn handle_line<W: Write>(&mut self, line: &str, out: &mut W) -> io::Result<bool> {
        let line = line.trim();
        if line.is_empty() {
            return Ok(true);
        }
        if let Some(choice) = self.pending_choice(line) {
            let call = self.pending[choice].clone();
            self.pending.clear();
            self.run_call(&call, out)?;
            return Ok(true);
        }
        self.pending.clear();

        if let Some(command) = line.strip_prefix(':') {
            let (name, rest) = command.split_once(char::is_whitespace).unwrap_or((command, ""));
            match name {
                "quit" | "q" | "exit" => return Ok(false),
                "state" => match self.home {
                    Some(home) => writeln!(out, "{}", home.dump_json())?,
                    None => writeln!(out, "no state available")?,
                },
                "explain" if !rest.trim().is_empty() => {
                    write!(out, "{}", explain(self.registry, rest.trim()))?;
                }
                "explain" => writeln!(out, "usage: :explain <sentence>")?,
                "help" => writeln!(out, "commands: :state, :explain <sentence>, :quit")?,
                _ => writeln!(out, "unknown command :{name} (try :help)")?,
            }
            return Ok(true);
        }

        let resolution = resolve(self.registry, line);
        for warning in &resolution.warnings {
            writeln!(out, "warning: {warning}")?;
        }
        match resolution.result {
            ResolutionResult::Resolved(call) => self.run_call(&call, out)?,
            ResolutionResult::Ambiguous(calls) => {
                writeln!(out, "did you mean:")?;
                for (i, call) in calls.iter().enumerate() {
                    writeln!(out, "  {}. {}", i + 1, self.describe(call))?;
                }
                writeln!(out, "enter a number to choose")?;
                self.pending = calls;
            }
            ResolutionResult::NoMatch {
                best_score,
                best_command,
            } => {
                if self.options.show_scores {
                    if let Some(id) = best_command {
                        writeln!(out, "best was {id} [score {best_score}]")?;
                    }
                }
                writeln!(out, "please reformulate")?;
            }
        }
        Ok(true)
    }

    fn pending_choice(&self, line: &str) -> Option<usize> {
        let n: usize = line.parse().ok()?;
        (1..=self.pending.len()).contains(&n).then(|| n - 1)
    }

    fn describe(&self, call: &ResolvedCall) -> String {
        if self.options.show_scores {
            call.to_string()
        } else {
            call.signature()
        }
    }

    fn run_call<W: Write>(&self, call: &ResolvedCall, out: &mut W) -> io::Result<()> {
        writeln!(out, "{call}")?;
        match execute_call(self.registry, call) {
            Ok(Some(message)) => writeln!(out, "{message}"),
            Ok(None) => Ok(()),
            Err(e) => writeln!(out, "error: {e}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use speakable::demo::{build_demo_registry, Power};

    fn session(input: &str) -> (String, Home) {
        let home = Home::new();
        let registry = build_demo_registry(&home);
        let mut out = Vec::new();
        Repl::new(&registry, ReplOptions::default())
            .with_home(&home)
            .run(input.as_bytes(), &mut out)
            .unwrap();
        (String::from_utf8(out).unwrap(), home)
    }

    #[test]
    fn resolves_and_executes() {
        let (out, home) = session("turn on light\n");
        assert!(out.starts_with("Light.turnOn() [score 1.00]"), "{out}");
        assert!(home.snapshot().lights.values().all(|l| l.power == Power::On));
    }

    #[test]
    fn ambiguity_offers_numbered_choices() {
        let (out, _) = session("light\n2\n");
        assert!(out.contains("did you mean:"), "{out}");
        assert!(out.contains("  1. "), "{out}");
        assert_eq!(out.matches("[score").count(), 1, "{out}");
    }

    #[test]
    fn unknown_sentences_ask_for_reformulation() {
        let (out, _) = session("recalibrate flux\n");
        assert_eq!(out.trim(), "please reformulate");
    }

    #[test]
    fn quit_stops_the_loop() {
        let (out, home) = session(":quit\nturn on light\n");
        assert!(out.is_empty());
        assert!(home.snapshot().lights.values().all(|l| l.power == Power::Off));
    }

    #[test]
    fn meta_commands() {
        let (out, _) = session(":state\n:explain turn on light\n:explain\n:bogus\n");
        assert!(out.starts_with('{'), "{out}");
        assert!(out.contains("usage: :explain"), "{out}");
        assert!(out.contains("unknown command :bogus"), "{out}");
    }

    #[test]
    fn survives_garbage() {
        let (out, _) = session("\"\n,,,\n-\n''\n99999999999999999999999\n:\n   \nsay\n");
        assert!(!out.is_empty());
    }

    proptest! {
        #[test]
        fn never_crashes(lines in prop::collection::vec(
            prop_oneof![
                any::<String>(),
                "(say|turn|dim|set|light|:explain|[0-9]{1,25}|,|and|to|all|'|\")( [a-z0-9',\"-]{0,12}){0,6}",
            ],
            0..8,
        )) {
            let home = Home::new();
            let registry = build_demo_registry(&home);
            let mut repl = Repl::new(&registry, ReplOptions { show_scores: true, prompt: true }).with_home(&home);
            let mut out = Vec::new();
            for line in &lines {
                if !repl.handle_line(line, &mut out).unwrap() {
                    break;
                }
            }
        }
    }
}
