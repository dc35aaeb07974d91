"""Ensemble-learning toolkit for detecting DoS and brute-force attacks in
MQTT traffic records: CSV ingestion, preprocessing (label encoding,
stratified splits, min-max scaling, SMOTE), three-method feature selection,
four from-scratch classifiers, stacking/voting/bagging ensembles, and
report-style evaluation with cross-validation.
"""

from .classifiers import (
    ClassifierSpec,
    DecisionTreeClassifier,
    GradientBoostedTreesClassifier,
    KNeighborsClassifier,
    RandomForestClassifier,
    build_base_classifier,
)
from .dataset import (
    ColumnSchema,
    Dataset,
    LabelEncoding,
    encode_class_labels,
    filter_classes,
    load_csv,
    save_csv,
)
from .ensembles import (
    BaggingClassifier,
    StackingClassifier,
    VotingClassifier,
    build_model,
)
from .evaluation import (
    ConfusionMatrix,
    CvReport,
    EvalReport,
    accuracy,
    class_metrics,
    confusion,
    cross_validate,
    evaluate,
)
from .feature_selection import (
    FeatureSet,
    PrincipalComponents,
    RankedFeatures,
    SelectionReport,
    consensus_select,
    golden_final_set,
    kbest_rank,
    pca_rank,
    pearson_rank,
    project,
)
from .preprocess import (
    CategoricalEncoder,
    MinMaxScaler,
    PreprocessArtifacts,
    SmoteConfig,
    SmoteOversampler,
    smote_oversample,
    stratified_fold_ids,
    stratified_split,
)
from .serialize import load_model, model_from_doc, model_to_doc, save_model
from .synth import SynthSpec, generate

__version__ = "0.1.0"
