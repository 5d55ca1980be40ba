# bayes-tree-planner tests
