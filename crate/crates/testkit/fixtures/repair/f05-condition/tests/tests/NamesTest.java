package tests;

public class NamesTest {
    public static boolean bothSet() {
        return app.Names.pick(" x ", "y").equals("x");
    }

    public static boolean neitherSet() {
        return app.Names.pick(null, null).equals("");
    }

    public static boolean onlyFirst() {
        return app.Names.pick(" x ", null).equals("x");
    }
}
