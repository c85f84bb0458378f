import torch
import logging

from typing import Dict, Sequence
from tqdm import tqdm
from .utils import ParallelManager


logger = logging.getLogger(__name__)


class ExpRunner(object):
    """
    repeat a certification experiment under the given config and random seeds
    """
    def __init__(self,
                 exp_func,
                 exp_config: Dict,
                 repeat_num=5,
                 seeds=None,
                 verbose=True,
                 ):
        """
        :param exp_func: runs one certification, called as exp_func(seed=seed, **exp_config)
        :param exp_config: the keyword arguments accepted by `exp_func`
        :param repeat_num: number of runs when `seeds` is not given
        :param seeds: explicit seeds, one per run
        :param verbose: print the config banner and show a progress bar
        """
        if seeds is None:
            self.seeds = list(range(repeat_num))
        elif isinstance(seeds, Sequence):
            self.seeds = list(map(int, seeds))
            assert len(self.seeds) == repeat_num, f'seeds num: {len(self.seeds)} neq repeat_num: {repeat_num}'
        else:
            raise TypeError(f"unsupported seeds type: {type(seeds)}")

        if len(self.seeds) != len(set(self.seeds)):
            logger.warning(f"you have duplicated random seeds in {self.seeds}")

        self.exp_func = exp_func
        self.exp_config: Dict = exp_config
        self.repeat_num = repeat_num
        self.verbose = verbose

        self.exp_results = []

    def clear(self):
        """
        clear the cached experiment records
        """
        self.exp_results.clear()

    def _setup(self):
        self.clear()
        if not self.verbose:
            return

        logger.info(f"repeat running {self.repeat_num} times, random seeds are {self.seeds}")
        for k, v in self.exp_config.items():
            logger.info(f"\t {k} = {v}")

    def _run_one(self, seed):
        torch.random.manual_seed(seed)
        return self.exp_func(seed=seed, **self.exp_config)

    def run(self):
        """
        run the repeated experiment sequentially
        :return: results in seed order
        """
        self._setup()
        for seed in tqdm(self.seeds, disable=not self.verbose):
            self.exp_results.append(self._run_one(seed))
        return self.exp_results

    def run_mp(self, num_workers=4):
        """
        thread-parallel version of run, results keep seed order
        """
        self._setup()
        manager = ParallelManager(num_workers)
        for run_ret in tqdm(manager.imap(self._run_one, self.seeds), total=self.repeat_num, disable=not self.verbose):
            self.exp_results.append(run_ret)
        return self.exp_results
