//! A deliberately naive second implementation of the game rules, used as an
//! oracle. Shares no code with the engine: grids are nested `Vec`s, reveal is
//! a repeat-until-stable sweep, and outcomes are plain labels.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RCell {
    Hidden,
    Flag,
    Open(u8),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ROutcome {
    Playing,
    Won,
    Lost,
}

#[derive(Clone, Debug)]
pub struct RefGame {
    pub rows: i32,
    pub cols: i32,
    pub mine: Vec<Vec<bool>>,
    pub shown: Vec<Vec<RCell>>,
    pub outcome: ROutcome,
    pub started: bool,
}

impl RefGame {
    pub fn new(rows: i32, cols: i32, mines: &[(i32, i32)]) -> Self {
        let mut mine = vec![vec![false; cols as usize]; rows as usize];
        for &(r, c) in mines {
            mine[(r - 1) as usize][(c - 1) as usize] = true;
        }
        RefGame {
            rows,
            cols,
            mine,
            shown: vec![vec![RCell::Hidden; cols as usize]; rows as usize],
            outcome: ROutcome::Playing,
            started: false,
        }
    }

    fn inside(&self, r: i32, c: i32) -> bool {
        (1..=self.rows).contains(&r) && (1..=self.cols).contains(&c)
    }

    fn at(&self, r: i32, c: i32) -> RCell {
        self.shown[(r - 1) as usize][(c - 1) as usize]
    }

    fn put(&mut self, r: i32, c: i32, v: RCell) {
        self.shown[(r - 1) as usize][(c - 1) as usize] = v;
    }

    fn is_mine(&self, r: i32, c: i32) -> bool {
        self.mine[(r - 1) as usize][(c - 1) as usize]
    }

    fn around(&self, r: i32, c: i32) -> Vec<(i32, i32)> {
        let mut v = vec![];
        for rr in r - 1..=r + 1 {
            for cc in c - 1..=c + 1 {
                if (rr, cc) != (r, c) && self.inside(rr, cc) {
                    v.push((rr, cc));
                }
            }
        }
        v
    }

    fn number(&self, r: i32, c: i32) -> u8 {
        self.around(r, c).iter().filter(|&&(a, b)| self.is_mine(a, b)).count() as u8
    }

    fn open_and_spread(&mut self, r: i32, c: i32) {
        let n = self.number(r, c);
        self.put(r, c, RCell::Open(n));
        loop {
            let mut changed = false;
            for rr in 1..=self.rows {
                for cc in 1..=self.cols {
                    if self.at(rr, cc) == RCell::Open(0) {
                        for (a, b) in self.around(rr, cc) {
                            if self.at(a, b) == RCell::Hidden {
                                let n = self.number(a, b);
                                self.put(a, b, RCell::Open(n));
                                changed = true;
                            }
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }

    fn won(&self) -> bool {
        let mut all_open = true;
        let mut flags_exact = true;
        for r in 1..=self.rows {
            for c in 1..=self.cols {
                let m = self.is_mine(r, c);
                let s = self.at(r, c);
                if !m && !matches!(s, RCell::Open(_)) {
                    all_open = false;
                }
                if m != (s == RCell::Flag) {
                    flags_exact = false;
                }
            }
        }
        all_open || flags_exact
    }

    /// Returns a label: `updated`, `won`, `lost`, `rejected` (game over) or
    /// `invalid:<case>`.
    pub fn step(&mut self, kind: char, r: i32, c: i32) -> String {
        if self.outcome != ROutcome::Playing {
            return "rejected".into();
        }
        if !self.inside(r, c) {
            return "invalid:bounds".into();
        }
        if !self.started && kind != 'L' {
            return "invalid:start".into();
        }
        let cell = self.at(r, c);
        match kind {
            'L' => match cell {
                RCell::Flag => return "invalid:L-flag".into(),
                RCell::Open(0) => return "invalid:L-blank".into(),
                RCell::Open(_) => return "invalid:L-number".into(),
                RCell::Hidden => {
                    self.started = true;
                    if self.is_mine(r, c) {
                        self.outcome = ROutcome::Lost;
                        return "lost".into();
                    }
                    self.open_and_spread(r, c);
                }
            },
            'R' => match cell {
                RCell::Open(0) => return "invalid:R-blank".into(),
                RCell::Open(_) => return "invalid:R-number".into(),
                RCell::Flag => self.put(r, c, RCell::Hidden),
                RCell::Hidden => self.put(r, c, RCell::Flag),
            },
            'M' => match cell {
                RCell::Open(0) => return "invalid:M-blank".into(),
                RCell::Flag => return "invalid:M-flag".into(),
                RCell::Hidden => return "invalid:M-hidden".into(),
                RCell::Open(n) => {
                    let nb = self.around(r, c);
                    let flags: Vec<_> = nb.iter().filter(|&&(a, b)| self.at(a, b) == RCell::Flag).collect();
                    if flags.is_empty() {
                        return "invalid:M-noflags".into();
                    }
                    if flags.len() != n as usize {
                        return "invalid:M-mismatch".into();
                    }
                    if flags.iter().any(|&&(a, b)| !self.is_mine(a, b)) {
                        self.outcome = ROutcome::Lost;
                        return "lost".into();
                    }
                    for (a, b) in nb {
                        if self.at(a, b) == RCell::Hidden {
                            self.open_and_spread(a, b);
                        }
                    }
                }
            },
            _ => unreachable!(),
        }
        if self.won() {
            self.outcome = ROutcome::Won;
            return "won".into();
        }
        "updated".into()
    }
}
