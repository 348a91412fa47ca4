public class Run15 {
    public static void main(String[] args) {
        int a = 18;
        int b = a * 2;
        int c = a + b;
        System.out.println(c);
    }
}
