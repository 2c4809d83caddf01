from splinet.trainer import RunRecord, Trainer, evaluate, train
from splinet.problems import make_problem
from splinet.utils import Config
