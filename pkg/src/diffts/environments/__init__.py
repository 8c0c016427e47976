from .auction import auction_tasks_from_rates, load_auction_tasks, read_win_rates
from .generators import (POPULAR_NICHE_DESK, LabeledArmsDistribution, PopularNicheConfig, corrupt,
                         gen_labeled_arms, gen_popular_niche, gen_toy_groups, popular_niche_mean,
                         recall_precision, relevant_groups, toy_groups_dataset)
from .maze import (FREE_MEAN, WALL_MEAN, GridGraph, MazeTask, SuperArmStructure, covering_paths,
                   covering_super_arms, edge_means, edges_from_bitmap, gen_maze,
                   generate_perfect_maze, render_bitmap, shortest_path)
from .registry import PROBLEMS, Problem, make_problem
from .tasks import AuctionTask, GaussianTask, RewardLaw, regret_of, step
