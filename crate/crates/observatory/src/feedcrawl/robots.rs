//! Minimal robots.txt support: allow/deny by path prefix for our agent or
//! the wildcard group, longest matching prefix wins.

#[derive(Debug, Clone)]
pub struct RobotsPolicy {
    rules: Vec<(bool, String)>, // (allow, path prefix)
}

impl RobotsPolicy {
    /// Everything allowed (no robots.txt, or it could not be fetched).
    pub fn allow_all() -> RobotsPolicy {
        RobotsPolicy { rules: Vec::new() }
    }

    pub fn parse(body: &str, user_agent: &str) -> RobotsPolicy {
        let ua = user_agent.to_lowercase();
        let mut rules = Vec::new();
        let mut group_applies = false;
        let mut in_group_header = false;

        for line in body.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((field, value)) = line.split_once(':') else {
                continue;
            };
            let field = field.trim().to_lowercase();
            let value = value.trim();
            match field.as_str() {
                "user-agent" => {
                    // A run of user-agent lines opens a new group.
                    if !in_group_header {
                        group_applies = false;
                        in_group_header = true;
                    }
                    let pat = value.to_lowercase();
                    if pat == "*" || ua.contains(&pat) {
                        group_applies = true;
                    }
                }
                "allow" | "disallow" => {
                    in_group_header = false;
                    if group_applies && !value.is_empty() {
                        rules.push((field == "allow", value.to_string()));
                    }
                }
                _ => {
                    in_group_header = false;
                }
            }
        }
        RobotsPolicy { rules }
    }

    pub fn allows(&self, path: &str) -> bool {
        let path = if path.is_empty() { "/" } else { path };
        let mut best: Option<(usize, bool)> = None;
        for (allow, prefix) in &self.rules {
            if path.starts_with(prefix.as_str()) {
                let len = prefix.len();
                if best.map_or(true, |(blen, _)| len > blen) {
                    best = Some((len, *allow));
                }
            }
        }
        best.map_or(true, |(_, allow)| allow)
    }
}
