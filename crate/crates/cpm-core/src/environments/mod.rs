//! Concrete CPM games: online ranking with top-item feedback, its
//! continuous score-vector variant, and explicit tabular fixtures.

pub mod ranking;
pub mod score;
pub mod tabular;

pub use ranking::{
    build_ranking_game, dcg_gain, ranking_argmax, ranking_secondmax, Ranking, RankingGame,
    RankingOracles,
};
pub use score::{
    build_score_ranking_game, score_ranking_argmax, ScoreRankingGame, ScoreRankingOracles,
    ScoreVector,
};
pub use tabular::{two_action_game, TabularAction, TabularGame, TabularOracles};
