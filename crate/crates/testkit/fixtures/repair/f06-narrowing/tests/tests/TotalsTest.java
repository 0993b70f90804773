package tests;

public class TotalsTest {
    public static boolean small() {
        return app.Totals.total(2, 3) == 5;
    }

    public static boolean large() {
        return app.Totals.total(100, 100) == 200;
    }
}
