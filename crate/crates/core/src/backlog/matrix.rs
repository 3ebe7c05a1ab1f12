use serde::Serialize;

use super::{Backlog, Level};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrant {
    QuickWin,
    Strategic,
    FillIn,
    Reconsider,
}

impl Quadrant {
    /// Medium benefit counts as high and medium cost as low.
    pub fn of(cost: Level, benefit: Level) -> Quadrant {
        let high_benefit = benefit != Level::Low;
        let high_cost = cost == Level::High;
        match (high_benefit, high_cost) {
            (true, false) => Quadrant::QuickWin,
            (true, true) => Quadrant::Strategic,
            (false, false) => Quadrant::FillIn,
            (false, true) => Quadrant::Reconsider,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Quadrant::QuickWin => "quick_win",
            Quadrant::Strategic => "strategic",
            Quadrant::FillIn => "fill_in",
            Quadrant::Reconsider => "reconsider",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct CostBenefitMatrix {
    pub quick_win: Vec<String>,
    pub strategic: Vec<String>,
    pub fill_in: Vec<String>,
    pub reconsider: Vec<String>,
    /// CQs lacking a cost or a benefit rating.
    pub unclassified: Vec<String>,
    /// CQs whose placement depended on a medium rating.
    pub medium_resolved: Vec<String>,
}

impl CostBenefitMatrix {
    pub fn quadrant(&self, q: Quadrant) -> &[String] {
        match q {
            Quadrant::QuickWin => &self.quick_win,
            Quadrant::Strategic => &self.strategic,
            Quadrant::FillIn => &self.fill_in,
            Quadrant::Reconsider => &self.reconsider,
        }
    }

    pub fn to_markdown(&self) -> String {
        let list = |ids: &[String]| if ids.is_empty() { "-".to_string() } else { ids.join(", ") };
        let mut out = String::from("| | low cost | high cost |\n|---|---|---|\n");
        out.push_str(&format!("| high benefit | quick win: {} | strategic: {} |\n", list(&self.quick_win), list(&self.strategic)));
        out.push_str(&format!("| low benefit | fill-in: {} | reconsider: {} |\n", list(&self.fill_in), list(&self.reconsider)));
        out.push_str(&format!("\nunclassified: {}\n", list(&self.unclassified)));
        if !self.medium_resolved.is_empty() {
            out.push_str(&format!(
                "placed using medium = high benefit / low cost: {}\n",
                list(&self.medium_resolved)
            ));
        }
        out
    }
}

pub fn build_cost_benefit(backlog: &Backlog) -> CostBenefitMatrix {
    let mut m = CostBenefitMatrix::default();
    for cq in &backlog.cqs {
        let (Some(cost), Some(benefit)) = (cq.cost, cq.benefit) else {
            m.unclassified.push(cq.id.clone());
            continue;
        };
        let target = match Quadrant::of(cost, benefit) {
            Quadrant::QuickWin => &mut m.quick_win,
            Quadrant::Strategic => &mut m.strategic,
            Quadrant::FillIn => &mut m.fill_in,
            Quadrant::Reconsider => &mut m.reconsider,
        };
        target.push(cq.id.clone());
        if cost == Level::Medium || benefit == Level::Medium {
            m.medium_resolved.push(cq.id.clone());
        }
    }
    m
}
