#include <gtest/gtest.h>

#include "test_util.hpp"
#include "uct/metamodel.hpp"

using namespace uct;

TEST(ParseMetamodel, SingleClass) {
  Metamodel mm = parse_metamodel(
      "class Figure { attr name : string key; ref children : Figure [*]; }");
  ASSERT_EQ(mm.classes().size(), 1u);
  const ClassDef& c = mm.at("Figure");
  EXPECT_FALSE(c.is_abstract);
  ASSERT_EQ(c.attributes.size(), 1u);
  EXPECT_EQ(c.attributes[0].name, "name");
  EXPECT_EQ(c.attributes[0].kind, AttrKind::String);
  EXPECT_TRUE(c.attributes[0].is_key);
  ASSERT_EQ(c.roles.size(), 1u);
  EXPECT_EQ(c.roles[0].target_class, "Figure");
  EXPECT_EQ(c.roles[0].upper, Upper::Many);
}

TEST(ParseMetamodel, EmptyInput) {
  Metamodel mm = parse_metamodel("");
  EXPECT_TRUE(mm.classes().empty());
}

TEST(ParseMetamodel, UnknownSuperclass) {
  try {
    parse_metamodel("class A extends B {}");
    FAIL() << "expected error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("unknown superclass B"), std::string::npos);
  }
}

TEST(ParseMetamodel, UnknownRoleTarget) {
  EXPECT_THROW(parse_metamodel("class A { ref x : Nowhere [1]; }"), Error);
}

TEST(ParseMetamodel, SyntaxErrorHasLine) {
  try {
    parse_metamodel("class A {\n  attr x string;\n}");
    FAIL() << "expected error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 2);
  }
}

TEST(ParseMetamodel, DuplicateClass) {
  EXPECT_THROW(parse_metamodel("class A {} class A {}"), Error);
}

TEST(ParseMetamodel, CommentsAndWhitespace) {
  Metamodel mm = parse_metamodel(
      "// header comment\nclass  A {\n  attr x : integer; // trailing\n}\n");
  EXPECT_EQ(mm.at("A").attributes[0].kind, AttrKind::Integer);
}

TEST(Validate, BundledMetamodelIsValid) {
  EXPECT_TRUE(validate(*uct_test::gmf_mm()).empty());
}

TEST(Validate, ConcreteNonLeaf) {
  Metamodel mm = parse_metamodel("class X {} class Y extends X {}");
  auto v = validate(mm);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0], "non-leaf class X must be abstract");
}

TEST(Validate, DualSuperclass) {
  Metamodel mm =
      parse_metamodel("abstract class A {} abstract class B {} class C extends A, B {}");
  auto v = validate(mm);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("multiple superclasses"), std::string::npos);
}

TEST(Validate, EmptyMetamodel) {
  EXPECT_TRUE(validate(Metamodel{}).empty());
}

TEST(Validate, KeyMustBeStringOrInteger) {
  Metamodel mm = parse_metamodel("class A { attr x : real key; }");
  auto v = validate(mm);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("must be string or integer"), std::string::npos);
}

TEST(Validate, InheritanceCycle) {
  Metamodel mm =
      parse_metamodel("abstract class A extends B {} abstract class B extends A {}");
  auto v = validate(mm);
  ASSERT_FALSE(v.empty());
  EXPECT_NE(v[0].find("cycle"), std::string::npos);
}

TEST(Validate, DuplicateInheritedFeature) {
  Metamodel mm = parse_metamodel(
      "abstract class A { attr x : string; } class B extends A { attr x : integer; }");
  auto v = validate(mm);
  ASSERT_FALSE(v.empty());
  EXPECT_NE(v[0].find("duplicate feature x"), std::string::npos);
}

TEST(Validate, MultipleKeys) {
  Metamodel mm =
      parse_metamodel("class A { attr x : string key; attr y : integer key; }");
  auto v = validate(mm);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("multiple key attributes"), std::string::npos);
}

TEST(IsSubtype, BundledHierarchy) {
  const Metamodel& mm = *uct_test::gmf_mm();
  EXPECT_TRUE(is_subtype(mm, "DiagramLabel", "DiagramElement"));
  EXPECT_TRUE(is_subtype(mm, "Figure", "Figure"));
  EXPECT_FALSE(is_subtype(mm, "DiagramElement", "DiagramLabel"));
  EXPECT_TRUE(is_subtype(mm, "RealFigure", "Figure1"));
  EXPECT_FALSE(is_subtype(mm, "RealFigure", "Figure"));
  EXPECT_THROW(is_subtype(mm, "Nope", "Figure"), Error);
  EXPECT_THROW(is_subtype(mm, "Figure", "Nope"), Error);
}

// Reflexive, antisymmetric, transitive over the whole bundled metamodel.
TEST(IsSubtype, PartialOrder) {
  const Metamodel& mm = *uct_test::gmf_mm();
  const auto& cs = mm.classes();
  for (const auto& a : cs) {
    EXPECT_TRUE(is_subtype(mm, a.name, a.name));
    for (const auto& b : cs) {
      if (a.name != b.name && is_subtype(mm, a.name, b.name))
        EXPECT_FALSE(is_subtype(mm, b.name, a.name));
      for (const auto& c : cs)
        if (is_subtype(mm, a.name, b.name) && is_subtype(mm, b.name, c.name))
          EXPECT_TRUE(is_subtype(mm, a.name, c.name));
    }
  }
}

TEST(FeatureOf, AttributeAndInheritedRole) {
  const Metamodel& mm = *uct_test::gmf_mm();
  Feature f = feature_of(mm, "Figure", "name");
  const auto* attr = std::get_if<const AttributeDef*>(&f);
  ASSERT_NE(attr, nullptr);
  EXPECT_EQ((*attr)->kind, AttrKind::String);
  EXPECT_TRUE((*attr)->is_key);

  Feature g = feature_of(mm, "DiagramLabel", "figure");
  const auto* role = std::get_if<const RoleDef*>(&g);
  ASSERT_NE(role, nullptr);
  EXPECT_EQ((*role)->target_class, "FigureDescriptor");
  EXPECT_EQ(mm.declaring_class("DiagramLabel", "figure"), "DiagramElement");

  try {
    feature_of(mm, "Figure", "bogus");
    FAIL() << "expected error";
  } catch (const Error& e) {
    std::string w = e.what();
    EXPECT_NE(w.find("Figure"), std::string::npos);
    EXPECT_NE(w.find("bogus"), std::string::npos);
  }
}

// parse . print . parse is a fixpoint of parse.
TEST(PrintMetamodel, RoundTrip) {
  const char* texts[] = {
      uct::gmf::kMetamodelText,
      "class A { attr x : integer; attr y : real; attr z : boolean; }\n"
      "abstract class B { ref a : A [1]; }\n"
      "class C extends B { attr k : integer key; ref all : A [*]; }\n",
      "",
  };
  for (const char* t : texts) {
    Metamodel once = parse_metamodel(t);
    Metamodel twice = parse_metamodel(print_metamodel(once));
    EXPECT_EQ(print_metamodel(once), print_metamodel(twice));
    EXPECT_EQ(once.classes().size(), twice.classes().size());
  }
}

// Every metamodel accepted by validate() satisfies the structural rules.
TEST(Validate, AcceptedMetamodelsAreWellFormed) {
  const Metamodel& mm = *uct_test::gmf_mm();
  ASSERT_TRUE(validate(mm).empty());
  for (const auto& c : mm.classes()) {
    EXPECT_LE(c.superclasses.size(), 1u);
    if (!mm.subclasses_of(c.name).empty()) EXPECT_TRUE(c.is_abstract);
  }
}

TEST(ClassInitials, LabelsAndScopeVars) {
  EXPECT_EQ(class_initials("RealFigure"), "rf");
  EXPECT_EQ(class_initials("FigureDescriptor"), "fd");
  EXPECT_EQ(class_initials("Canvas"), "c");
  EXPECT_EQ(class_initials("FigureGallery"), "fg");
  EXPECT_EQ(class_initials("widget"), "w");
}
