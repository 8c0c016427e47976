from .config import AGENT_KINDS, AgentConfig, ExperimentConfig, TrainingSection, load_config, parse_config
from .manifest import build_manifest, write_manifest
from .pipeline import (Datasets, ExperimentResult, build_datasets, build_problem, run_episode, run_experiment,
                       train_clean_prior, train_imperfect_prior)
from .records import (RECORD_HEADER, SUMMARY_HEADER, RecordWriter, RegretRecord, final_means, read_records, summarize,
                      write_records, write_summary)
from .seeding import derive_seed, unit_rng
