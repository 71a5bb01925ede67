//! Renders a game state into the observation text the models read.
//!
//! The text mentions every interactable entity along with the facts that
//! determine whether acting on it can work: open/closed/locked status,
//! what sits where, which exits exist, and what the player carries.  The
//! output is already lowercase with punctuation spaced out, so tokenizing
//! it is the identity on whitespace splits.

use super::state::{GameState, Kind, ObjId, Place};
use crate::textcorpus::tokenize;

fn article(name: &str) -> &'static str {
    match name.chars().next() {
        Some('a' | 'e' | 'i' | 'o' | 'u') => "an",
        _ => "a",
    }
}

/// "a x", "a x and a y", "a x , a y and a z".
fn list_phrase(names: &[&str]) -> String {
    let with_articles: Vec<String> =
        names.iter().map(|n| format!("{} {}", article(n), n)).collect();
    match with_articles.len() {
        0 => String::new(),
        1 => with_articles[0].clone(),
        _ => {
            let head = with_articles[..with_articles.len() - 1].join(" , ");
            format!("{} and {}", head, with_articles.last().unwrap())
        }
    }
}

/// The full observation for the player's current room, one token per
/// vector entry.
pub fn render_context(state: &GameState) -> Vec<String> {
    let mut text = String::new();
    let room = state.room(state.player);
    text.push_str(&format!("-= {name} =- you have entered the {name} .", name = room.name));

    let here = Place::Room(state.player);
    for (i, o) in state.objects.iter().enumerate() {
        if o.place != here {
            continue;
        }
        match o.kind {
            Kind::Container => {
                if o.locked {
                    text.push_str(&format!(" you see a locked {} .", o.name));
                } else if !o.open {
                    text.push_str(&format!(" you see a closed {} .", o.name));
                } else {
                    text.push_str(&format!(" you see an open {} .", o.name));
                    let contents: Vec<&str> = state
                        .objects
                        .iter()
                        .filter(|c| c.place == Place::In(ObjId(i)))
                        .map(|c| c.name.as_str())
                        .collect();
                    if contents.is_empty() {
                        text.push_str(&format!(" the {} is empty .", o.name));
                    } else {
                        text.push_str(&format!(
                            " the {} contains {} .",
                            o.name,
                            list_phrase(&contents)
                        ));
                    }
                }
            }
            Kind::Supporter => {
                text.push_str(&format!(" there is {} {} .", article(&o.name), o.name));
                let load: Vec<&str> = state
                    .objects
                    .iter()
                    .filter(|c| c.place == Place::On(ObjId(i)))
                    .map(|c| c.name.as_str())
                    .collect();
                if load.is_empty() {
                    text.push_str(&format!(" there is nothing on the {} .", o.name));
                } else {
                    text.push_str(&format!(
                        " you see {} on the {} .",
                        list_phrase(&load),
                        o.name
                    ));
                }
            }
            _ => {
                text.push_str(&format!(
                    " there is {} {} on the floor .",
                    article(&o.name),
                    o.name
                ));
            }
        }
    }

    for (&dir, exit) in &room.exits {
        match exit.door {
            Some(d) => {
                let door = state.door(d);
                let status = if door.locked {
                    "locked"
                } else if door.open {
                    "open"
                } else {
                    "closed"
                };
                text.push_str(&format!(
                    " there is a {} {} to the {} .",
                    status,
                    door.name,
                    dir.as_str()
                ));
            }
            None => {
                text.push_str(&format!(" there is an unblocked exit to the {} .", dir.as_str()));
            }
        }
    }

    let carried: Vec<&str> =
        state.inventory().into_iter().map(|i| state.obj(i).name.as_str()).collect();
    if carried.is_empty() {
        text.push_str(" you are carrying nothing .");
    } else {
        text.push_str(&format!(" you are carrying : {} .", list_phrase(&carried)));
    }

    tokenize(&text)
}
