from .leaderboard import INDEX_NAME, LOG_NAME, Leaderboard, LeaderboardEntry, rank_entries, read_log, replay
from .scoring import TASK_FILES, ScoreOptions, score_overall, score_records, score_task

__all__ = ["INDEX_NAME", "LOG_NAME", "Leaderboard", "LeaderboardEntry", "rank_entries", "read_log", "replay",
           "TASK_FILES", "ScoreOptions", "score_overall", "score_records", "score_task"]
