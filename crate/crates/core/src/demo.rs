//! A simulated smart home: numbered, positioned and named lights, a few
//! screens and a speech output, wired to a registry of voice commands.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, MutexGuard};

use serde::Serialize;

use crate::error::ProviderError;
use crate::model::{
    CommandSpec, FixedMapping, HandlerResult, ParameterSpec, Registry, RegistryBuilder, TypeDescriptor,
};
use crate::value::{ArgValue, CollectionValue};

pub const LIGHT_COUNT: u32 = 10;
pub const SCREEN_COUNT: u32 = 3;
/// Brightness a dimmed light is set to.
pub const DIM_LEVEL: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Power {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Color {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Color {
    pub const fn rgb(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LightState {
    pub power: Power,
    pub brightness: f64,
    pub color: Color,
}

impl Default for LightState {
    fn default() -> Self {
        Self {
            power: Power::Off,
            brightness: 100.0,
            color: Color::rgb(255, 255, 255),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreenState {
    pub power: Power,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomeState {
    pub lights: BTreeMap<u32, LightState>,
    pub named_lights: BTreeMap<String, u32>,
    pub positioned_lights: BTreeMap<String, u32>,
    pub screens: BTreeMap<u32, ScreenState>,
    pub spoken: Vec<String>,
}

impl Default for HomeState {
    fn default() -> Self {
        Self {
            lights: (1..=LIGHT_COUNT).map(|n| (n, LightState::default())).collect(),
            named_lights: BTreeMap::from([("front".to_string(), 4), ("back".to_string(), 5)]),
            positioned_lights: BTreeMap::from([
                ("LEFT".to_string(), 1),
                ("MIDDLE".to_string(), 2),
                ("RIGHT".to_string(), 3),
            ]),
            screens: (1..=SCREEN_COUNT)
                .map(|n| (n, ScreenState { power: Power::Off }))
                .collect(),
            spoken: Vec::new(),
        }
    }
}

type Failure = Box<dyn std::error::Error + Send + Sync>;

impl HomeState {
    fn light(&mut self, number: i64) -> Result<&mut LightState, Failure> {
        u32::try_from(number)
            .ok()
            .and_then(|n| self.lights.get_mut(&n))
            .ok_or_else(|| format!("there is no light {number}").into())
    }

    fn position(&self, name: &str) -> Result<u32, Failure> {
        self.positioned_lights
            .get(name)
            .copied()
            .ok_or_else(|| format!("there is no {name} light").into())
    }

    fn named(&self, name: &str) -> Result<u32, Failure> {
        self.named_lights
            .get(name)
            .copied()
            .ok_or_else(|| format!("there is no light named {name:?}").into())
    }
}

/// Shared handle on the home state, cloned into every handler.
#[derive(Clone, Default)]
pub struct Home(Arc<Mutex<HomeState>>);

impl Home {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&self) -> MutexGuard<'_, HomeState> {
        self.0.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn snapshot(&self) -> HomeState {
        self.state().clone()
    }

    /// State as pretty JSON with stable key order.
    pub fn dump_json(&self) -> String {
        serde_json::to_string_pretty(&*self.state()).expect("state serializes")
    }

    /// Give an existing light a name usable in sentences.
    pub fn name_light(&self, name: &str, number: u32) {
        self.state().named_lights.insert(name.to_lowercase(), number);
    }
}

pub fn color_mapping() -> FixedMapping {
    FixedMapping::default()
        .with("red", Color::rgb(255, 0, 0))
        .with("green", Color::rgb(0, 255, 0))
        .with("blue", Color::rgb(0, 0, 255))
        .with("yellow", Color::rgb(255, 255, 0))
        .with("white", Color::rgb(255, 255, 255))
}

fn positions() -> TypeDescriptor {
    TypeDescriptor::enumeration(&["LEFT", "MIDDLE", "RIGHT"])
}

fn int(args: &[ArgValue], i: usize) -> Result<i64, Failure> {
    args.get(i)
        .and_then(ArgValue::as_integer)
        .ok_or_else(|| format!("argument {i} is not an integer").into())
}

fn text(args: &[ArgValue], i: usize) -> Result<&str, Failure> {
    args.get(i)
        .and_then(ArgValue::as_str)
        .ok_or_else(|| format!("argument {i} is not a word").into())
}

fn collection(args: &[ArgValue], i: usize) -> Result<&CollectionValue, Failure> {
    args.get(i)
        .and_then(ArgValue::as_collection)
        .ok_or_else(|| format!("argument {i} is not a collection").into())
}

/// Build the demo registry over `home`.
pub fn build_demo_registry(home: &Home) -> Registry {
    let mut b = RegistryBuilder::new();
    register_demo(&mut b, home).expect("demo commands are well-formed");
    b.freeze()
}

fn with_home<F>(home: &Home, f: F) -> impl Fn(&[ArgValue]) -> HandlerResult + Send + Sync + 'static
where
    F: Fn(&mut HomeState, &[ArgValue]) -> HandlerResult + Send + Sync + 'static,
{
    let home = home.clone();
    move |args| f(&mut home.state(), args)
}

pub fn register_demo(b: &mut RegistryBuilder, home: &Home) -> Result<(), crate::error::RegistryError> {
    b.register(
        CommandSpec::new("LightService", "turnOn").handler(with_home(home, |s, _| {
            s.lights.values_mut().for_each(|l| l.power = Power::On);
            Ok(Some("all lights on".into()))
        })),
    )?;

    b.register(
        CommandSpec::new("LightService", "turnOn")
            .id("Light.turnOn#2")
            .param(ParameterSpec::new("number", TypeDescriptor::Integer))
            .handler(with_home(home, |s, args| {
                let n = int(args, 0)?;
                s.light(n)?.power = Power::On;
                Ok(Some(format!("light {n} on")))
            })),
    )?;

    b.register(
        CommandSpec::new("LightService", "turnOn")
            .id("Light.turnOn#3")
            .param(ParameterSpec::new("position", positions()))
            .handler(with_home(home, |s, args| {
                let position = text(args, 0)?;
                let n = s.position(position)?;
                s.light(i64::from(n))?.power = Power::On;
                Ok(Some(format!("{} light on", position.to_lowercase())))
            })),
    )?;

    let names = home.clone();
    let light_names =
        move || -> Result<Vec<String>, ProviderError> { Ok(names.state().named_lights.keys().cloned().collect()) };
    b.register(
        CommandSpec::new("LightService", "turnOn")
            .id("Light.turnOn#4")
            .param(ParameterSpec::new("name", TypeDescriptor::provided_by(light_names)))
            .handler(with_home(home, |s, args| {
                let name = text(args, 0)?;
                let n = s.named(name)?;
                s.light(i64::from(n))?.power = Power::On;
                Ok(Some(format!("{name} light on")))
            })),
    )?;

    b.register(
        CommandSpec::new("LightService", "turnOff")
            .extra_words(["all"])
            .optional_words(["turn"])
            .handler(with_home(home, |s, _| {
                s.lights.values_mut().for_each(|l| l.power = Power::Off);
                Ok(Some("all lights off".into()))
            })),
    )?;

    b.register(
        CommandSpec::new("LightService", "setColor")
            .param(ParameterSpec::new("number", TypeDescriptor::Integer))
            .param(ParameterSpec::new("color", TypeDescriptor::mapped_by(color_mapping())))
            .handler(with_home(home, |s, args| {
                let n = int(args, 0)?;
                let color = *args
                    .get(1)
                    .and_then(|a| a.object::<Color>())
                    .ok_or("argument 1 is not a color")?;
                s.light(n)?.color = color;
                Ok(Some(format!("light {n} is now {}", args[1].as_str().unwrap_or("?"))))
            })),
    )?;

    b.register(
        CommandSpec::new("LightService", "setBrightness")
            .param(ParameterSpec::new("light", TypeDescriptor::Integer))
            .param(ParameterSpec::new("brightness", TypeDescriptor::Real))
            .handler(with_home(home, |s, args| {
                let n = int(args, 0)?;
                let level = args
                    .get(1)
                    .and_then(ArgValue::as_real)
                    .ok_or("argument 1 is not a number")?;
                if !(0.0..=100.0).contains(&level) {
                    return Err(format!("brightness {level} is outside 0-100").into());
                }
                s.light(n)?.brightness = level;
                Ok(Some(format!("light {n} brightness {level}")))
            })),
    )?;

    b.register(
        CommandSpec::new("LightService", "dim")
            .param(ParameterSpec::new("lights", TypeDescriptor::integer_ranges()))
            .handler(with_home(home, |s, args| {
                let lights = collection(args, 0)?;
                let numbers: Vec<i64> = lights.iter().filter_map(|v| v.as_integer()).collect();
                for &n in &numbers {
                    s.light(n)?;
                }
                for &n in &numbers {
                    s.light(n)?.brightness = DIM_LEVEL;
                }
                Ok(Some(format!("dimmed {} lights", numbers.len())))
            })),
    )?;

    b.register(
        CommandSpec::new("LightService", "dim")
            .id("Light.dim#2")
            .param(ParameterSpec::new("lights", TypeDescriptor::collection_of(positions())))
            .handler(with_home(home, |s, args| {
                let lights = collection(args, 0)?;
                let mut numbers = Vec::new();
                for position in lights.iter() {
                    numbers.push(s.position(position.as_str().unwrap_or_default())?);
                }
                for &n in &numbers {
                    s.light(i64::from(n))?.brightness = DIM_LEVEL;
                }
                Ok(Some(format!("dimmed {} lights", numbers.len())))
            })),
    )?;

    b.class_synonym("ScreenService", "screen", ["display", "monitor"])?;
    b.register(
        CommandSpec::new("ScreenService", "set")
            .synonym("set", ["turn"])
            .param(ParameterSpec::new("screen", TypeDescriptor::Integer))
            .param(ParameterSpec::new("state", TypeDescriptor::enumeration(&["ON", "OFF"])))
            .handler(with_home(home, |s, args| {
                let n = int(args, 0)?;
                let power = match text(args, 1)? {
                    "ON" => Power::On,
                    _ => Power::Off,
                };
                let screen = u32::try_from(n)
                    .ok()
                    .and_then(|k| s.screens.get_mut(&k))
                    .ok_or_else(|| format!("there is no screen {n}"))?;
                screen.power = power;
                Ok(Some(format!("screen {n} {power:?}").to_lowercase()))
            })),
    )?;

    b.register(
        CommandSpec::new("SpeechService", "pronounce")
            .param(ParameterSpec::new("sentence", TypeDescriptor::Text))
            .fallback("say (.*)")
            .handler(with_home(home, |s, args| {
                let sentence = text(args, 0)?.to_string();
                s.spoken.push(sentence.clone());
                Ok(Some(format!("saying {sentence}")))
            })),
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{execute, resolve};

    #[test]
    fn eleven_commands() {
        let registry = build_demo_registry(&Home::new());
        assert_eq!(registry.len(), 11);
    }

    #[test]
    fn handlers_change_only_their_target() {
        let home = Home::new();
        let registry = build_demo_registry(&home);
        let before = home.snapshot();
        execute(&registry, &resolve(&registry, "turn on light 3").result).unwrap();
        let after = home.snapshot();
        assert_eq!(after.lights[&3].power, Power::On);
        let mut expected = before.clone();
        expected.lights.get_mut(&3).unwrap().power = Power::On;
        assert_eq!(after, expected);
        // Idempotent.
        execute(&registry, &resolve(&registry, "turn on light 3").result).unwrap();
        assert_eq!(home.snapshot(), expected);
    }

    #[test]
    fn runtime_names_resolve_without_reregistration() {
        let home = Home::new();
        let registry = build_demo_registry(&home);
        let result = resolve(&registry, "turn on the porch light").result;
        assert_ne!(result.resolved().map(|c| c.command_id.as_str()), Some("Light.turnOn#4"));
        home.name_light("porch", 7);
        let result = resolve(&registry, "turn on the porch light").result;
        let call = result.resolved().unwrap();
        assert_eq!(call.command_id, "Light.turnOn#4");
        assert_eq!(call.arguments, vec![ArgValue::Text("porch".into())]);
        execute(&registry, &result).unwrap();
        assert_eq!(home.state().lights[&7].power, Power::On);
    }

    #[test]
    fn invalid_targets_fail() {
        let home = Home::new();
        let registry = build_demo_registry(&home);
        let result = resolve(&registry, "turn on light 42").result;
        assert!(execute(&registry, &result).is_err());
        let result = resolve(&registry, "set light 1 to brightness 150").result;
        assert!(execute(&registry, &result).is_err());
        // dim validates every light before changing any.
        let result = resolve(&registry, "dim lights 9 to 12").result;
        assert!(execute(&registry, &result).is_err());
        assert_eq!(home.state().lights[&9].brightness, 100.0);
    }

    #[test]
    fn dump_is_stable_json() {
        let home = Home::new();
        let a = home.dump_json();
        assert_eq!(a, home.dump_json());
        let parsed: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(parsed["lights"]["1"]["power"], "off");
        assert_eq!(parsed["named_lights"]["front"], 4);
    }
}
